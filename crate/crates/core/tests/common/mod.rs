//! Brute-force oracles for small bounded LPs and MILPs, and a generator for
//! random instances.

#![allow(dead_code)]

use lunar_logistics::milp::{Constraint, MilpProblem, Sense, VarKind, Variable};
use rand::Rng;

/// One hyperplane `a.x = b` of the polytope.
struct Plane {
    a: Vec<f64>,
    b: f64,
}

fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    let pivot_row = m[col].clone();
                    for (dst, src) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                        *dst -= f * src;
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn feasible(p: &MilpProblem, x: &[f64]) -> bool {
    let rows_ok = p.constraints.iter().all(|c| {
        let scale = 1.0 + c.rhs.abs() + c.coefficients.iter().map(|(j, a)| (a * x[*j]).abs()).sum::<f64>();
        c.violation(x) <= 1e-9 * scale
    });
    let bounds_ok = p
        .variables
        .iter()
        .zip(x)
        .all(|(v, x)| *x >= v.lower - 1e-9 * (1.0 + v.lower.abs()) && *x <= v.upper + 1e-9 * (1.0 + v.upper.abs()));
    rows_ok && bounds_ok
}

fn subsets(total: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if current.len() == k {
        out(current);
        return;
    }
    for i in start..total {
        if total - i < k - current.len() {
            break;
        }
        current.push(i);
        subsets(total, k, i + 1, current, out);
        current.pop();
    }
}

/// Optimum of the LP relaxation by enumerating every vertex of the
/// polytope. Every variable must have finite bounds. `None` if infeasible.
pub fn vertex_optimum(p: &MilpProblem) -> Option<f64> {
    let n = p.num_variables();
    if n == 0 {
        return feasible(p, &[]).then_some(0.0);
    }
    let mut planes = Vec::new();
    for c in &p.constraints {
        let mut a = vec![0.0; n];
        for (j, v) in &c.coefficients {
            a[*j] += v;
        }
        planes.push(Plane { a, b: c.rhs });
    }
    for (j, v) in p.variables.iter().enumerate() {
        assert!(v.lower.is_finite() && v.upper.is_finite(), "oracle needs a bounded box");
        for bound in [v.lower, v.upper] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push(Plane { a, b: bound });
        }
    }
    let mut best: Option<f64> = None;
    subsets(planes.len(), n, 0, &mut Vec::new(), &mut |pick| {
        let m = pick.iter().map(|&i| planes[i].a.clone()).collect();
        let rhs = pick.iter().map(|&i| planes[i].b).collect();
        if let Some(x) = solve_square(m, rhs) {
            if feasible(p, &x) {
                let z = p.objective(&x);
                best = Some(best.map_or(z, |b: f64| b.min(z)));
            }
        }
    });
    best
}

/// Optimum of a small MILP: every integer assignment, each with the vertex
/// oracle over the remaining continuous variables.
pub fn integer_optimum(p: &MilpProblem) -> Option<f64> {
    let ints: Vec<usize> = (0..p.num_variables()).filter(|&j| p.variables[j].kind == VarKind::Integer).collect();
    let conts: Vec<usize> = (0..p.num_variables()).filter(|&j| p.variables[j].kind != VarKind::Integer).collect();
    let ranges: Vec<(i64, i64)> = ints
        .iter()
        .map(|&j| (p.variables[j].lower.ceil() as i64, p.variables[j].upper.floor() as i64))
        .collect();
    let mut best: Option<f64> = None;
    let mut assign: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return None;
    }
    loop {
        let mut sub = MilpProblem::new();
        let mut fixed_cost = 0.0;
        let mut value = vec![0.0; p.num_variables()];
        for (k, &j) in ints.iter().enumerate() {
            value[j] = assign[k] as f64;
            fixed_cost += p.variables[j].cost * value[j];
        }
        let mut map = vec![usize::MAX; p.num_variables()];
        for &j in &conts {
            let v = &p.variables[j];
            map[j] = sub.add_variable(Variable::continuous(v.name.clone(), v.lower, v.upper, v.cost));
        }
        for c in &p.constraints {
            let mut rhs = c.rhs;
            let mut coeffs = Vec::new();
            for (j, a) in &c.coefficients {
                if map[*j] == usize::MAX {
                    rhs -= a * value[*j];
                } else {
                    coeffs.push((map[*j], *a));
                }
            }
            sub.add_constraint(Constraint::new(c.name.clone(), coeffs, c.sense, rhs));
        }
        if let Some(z) = vertex_optimum(&sub) {
            let total = z + fixed_cost;
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == assign.len() {
                return best;
            }
            if assign[k] < ranges[k].1 {
                assign[k] += 1;
                break;
            }
            assign[k] = ranges[k].0;
            k += 1;
        }
    }
}

fn coeff<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.3) {
        0.0
    } else {
        f64::from(rng.gen_range(-10..=10)) / 2.0
    }
}

/// Random bounded problem with `continuous` real and `integers` integer
/// variables (integers bounded by 5) and up to `max_rows` rows. Most
/// instances are feasible by construction; about one in ten gets a random
/// right-hand side instead.
pub fn random_problem<R: Rng>(rng: &mut R, continuous: usize, integers: usize, max_rows: usize) -> MilpProblem {
    let mut p = MilpProblem::new();
    let mut anchor = Vec::new();
    for j in 0..continuous {
        let lower = if rng.gen_bool(0.7) { 0.0 } else { -f64::from(rng.gen_range(1..=3)) };
        let upper = lower + f64::from(rng.gen_range(1..=8));
        p.add_variable(Variable::continuous(format!("x{j}"), lower, upper, coeff(rng)));
        anchor.push(rng.gen_range(lower..=upper));
    }
    for j in 0..integers {
        let upper = f64::from(rng.gen_range(1..=5));
        p.add_variable(Variable::integer(format!("n{j}"), 0.0, upper, coeff(rng)));
        anchor.push(f64::from(rng.gen_range(0..=upper as i32)));
    }
    let rows = rng.gen_range(1..=max_rows);
    for i in 0..rows {
        let coefficients: Vec<(usize, f64)> =
            (0..p.num_variables()).map(|j| (j, coeff(rng))).filter(|(_, a)| *a != 0.0).collect();
        let at: f64 = coefficients.iter().map(|(j, a)| a * anchor[*j]).sum();
        let sense = match rng.gen_range(0..5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = if rng.gen_bool(0.1) {
            f64::from(rng.gen_range(-20..=20))
        } else {
            let slack = f64::from(rng.gen_range(0..=6)) / 2.0;
            match sense {
                Sense::Le => at + slack,
                Sense::Ge => at - slack,
                Sense::Eq => at,
            }
        };
        p.add_constraint(Constraint::new(format!("r{i}"), coefficients, sense, rhs));
    }
    p
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
