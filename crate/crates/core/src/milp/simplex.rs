//! Dense bounded-variable primal simplex.
//!
//! Rows are brought to equality form with one slack per inequality; every
//! structural starts at a finite bound and an artificial per row absorbs the
//! residual, so phase 1 starts from the all-artificial basis. The tableau
//! `B^-1 A` is updated in place and rebuilt from the original matrix every
//! [`REFACTOR_INTERVAL`] pivots and before optimality is declared.

use super::problem::{MilpProblem, Sense};
use super::{Solution, SolveStatus};

/// Relative row-residual tolerance a returned solution must meet.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Reduced-cost tolerance, applied to the internally scaled objective.
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_INTERVAL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    /// Free variable parked at zero.
    Free,
}

#[derive(Debug)]
enum Breakdown {
    Singular { column: usize, pivot: f64 },
    IterationLimit(usize),
}

impl Breakdown {
    fn message(&self) -> String {
        match self {
            Breakdown::Singular { column, pivot } => {
                format!("basis became singular refactoring column {column} (best pivot {pivot:e})")
            }
            Breakdown::IterationLimit(n) => format!("iteration limit of {n} pivots reached"),
        }
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// standard-form matrix, row-major
    a: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    /// B^-1 A, row-major
    tab: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    iterations: usize,
}

impl Tableau {
    fn recompute_reduced_costs(&mut self) {
        let nc = self.ncols;
        self.d.copy_from_slice(&self.cost);
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = self.cost[bv];
            if cb != 0.0 {
                let row = &self.tab[i * nc..(i + 1) * nc];
                for (d, t) in self.d.iter_mut().zip(row) {
                    *d -= cb * t;
                }
            }
        }
        for &bv in &self.basis {
            self.d[bv] = 0.0;
        }
    }

    /// Rebuild `B^-1 A` and the basic values from the original matrix.
    fn refactor(&mut self) -> Result<(), Breakdown> {
        let (m, nc) = (self.m, self.ncols);
        let w = nc + 1;
        let mut mat = vec![0.0; m * w];
        for i in 0..m {
            mat[i * w..i * w + nc].copy_from_slice(&self.a[i * nc..(i + 1) * nc]);
            let mut rhs = self.b[i];
            for j in 0..nc {
                if !matches!(self.state[j], State::Basic(_)) {
                    let aij = self.a[i * nc + j];
                    if aij != 0.0 {
                        rhs -= aij * self.x[j];
                    }
                }
            }
            mat[i * w + nc] = rhs;
        }
        let mut used = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &col in &self.basis {
            let mut best = (usize::MAX, 0.0f64);
            for r in 0..m {
                if !used[r] {
                    let v = mat[r * w + col].abs();
                    if v > best.1 {
                        best = (r, v);
                    }
                }
            }
            if best.0 == usize::MAX || best.1 < SINGULAR_TOL {
                return Err(Breakdown::Singular {
                    column: col,
                    pivot: best.1,
                });
            }
            let r = best.0;
            used[r] = true;
            new_basis[r] = col;
            let p = mat[r * w + col];
            for v in &mut mat[r * w..(r + 1) * w] {
                *v /= p;
            }
            mat[r * w + col] = 1.0;
            let pivot_row: Vec<f64> = mat[r * w..(r + 1) * w].to_vec();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = mat[i * w + col];
                if f != 0.0 {
                    for (v, p) in mat[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                    mat[i * w + col] = 0.0;
                }
            }
        }
        for i in 0..m {
            self.tab[i * nc..(i + 1) * nc].copy_from_slice(&mat[i * w..i * w + nc]);
            let bv = new_basis[i];
            self.x[bv] = mat[i * w + nc];
            self.state[bv] = State::Basic(i);
        }
        self.basis = new_basis;
        self.recompute_reduced_costs();
        Ok(())
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut pick = None;
        let mut best = 0.0;
        for j in 0..self.ncols {
            let dj = self.d[j];
            let dir = match self.state[j] {
                State::Basic(_) => continue,
                State::Lower if dj < -OPTIMALITY_TOL && self.hi[j] > self.lo[j] => 1.0,
                State::Upper if dj > OPTIMALITY_TOL && self.hi[j] > self.lo[j] => -1.0,
                State::Free if dj < -OPTIMALITY_TOL => 1.0,
                State::Free if dj > OPTIMALITY_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best {
                best = dj.abs();
                pick = Some((j, dir));
            }
        }
        pick
    }

    /// One pivot or bound flip. Returns the step length, or `None` when the
    /// entering direction is unbounded.
    fn step(&mut self, j: usize, dir: f64, bland: bool) -> Option<f64> {
        let nc = self.ncols;
        let flip = if self.lo[j].is_finite() && self.hi[j].is_finite() {
            self.hi[j] - self.lo[j]
        } else {
            f64::INFINITY
        };
        let mut leave: Option<(usize, bool)> = None;
        let mut best = f64::INFINITY;
        let mut best_alpha = 0.0;
        for i in 0..self.m {
            let alpha = self.tab[i * nc + j] * dir;
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let bv = self.basis[i];
            let (limit, to_upper) = if alpha > 0.0 {
                if !self.lo[bv].is_finite() {
                    continue;
                }
                ((self.x[bv] - self.lo[bv]).max(0.0) / alpha, false)
            } else {
                if !self.hi[bv].is_finite() {
                    continue;
                }
                ((self.hi[bv] - self.x[bv]).max(0.0) / -alpha, true)
            };
            let tie = 1e-12 * best.max(1.0);
            let take = match leave {
                None => true,
                Some(_) if limit < best - tie => true,
                Some((r, _)) if limit <= best + tie => {
                    if bland {
                        bv < self.basis[r]
                    } else {
                        alpha.abs() > best_alpha
                    }
                }
                _ => false,
            };
            if take {
                best = best.min(limit);
                best_alpha = alpha.abs();
                leave = Some((i, to_upper));
            }
        }

        let theta = best.min(flip);
        if !theta.is_finite() {
            return None;
        }
        self.x[j] += dir * theta;
        for i in 0..self.m {
            let t = self.tab[i * nc + j];
            if t != 0.0 {
                let bv = self.basis[i];
                self.x[bv] -= t * dir * theta;
            }
        }
        if flip <= best {
            self.state[j] = if dir > 0.0 { State::Upper } else { State::Lower };
            self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
            return Some(theta);
        }

        let (r, to_upper) = leave.expect("finite step has a leaving row");
        let leaving = self.basis[r];
        self.x[leaving] = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
        self.state[leaving] = if to_upper { State::Upper } else { State::Lower };
        self.pivot(r, j);
        Some(theta)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let p = self.tab[r * nc + j];
        for v in &mut self.tab[r * nc..(r + 1) * nc] {
            *v /= p;
        }
        self.tab[r * nc + j] = 1.0;
        let pivot_row: Vec<f64> = self.tab[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * nc + j];
            if f != 0.0 {
                for (v, p) in self.tab[i * nc..(i + 1) * nc].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                self.tab[i * nc + j] = 0.0;
            }
        }
        let dj = self.d[j];
        if dj != 0.0 {
            for (d, p) in self.d.iter_mut().zip(&pivot_row) {
                *d -= dj * p;
            }
        }
        self.d[j] = 0.0;
        self.basis[r] = j;
        self.state[j] = State::Basic(r);
    }

    fn run_phase(&mut self, limit: usize) -> Result<PhaseEnd, Breakdown> {
        // Bland's rule after this many pivots without objective progress
        let stall_limit = 10 * (self.m + self.ncols);
        let mut stall = 0;
        let mut bland = false;
        let mut since_refactor = 0;
        let mut rechecks = 0;
        loop {
            if self.iterations >= limit {
                return Err(Breakdown::IterationLimit(limit));
            }
            let Some((j, dir)) = self.choose_entering(bland) else {
                if since_refactor > 0 && rechecks < 3 {
                    self.refactor()?;
                    since_refactor = 0;
                    rechecks += 1;
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };
            let gain = self.d[j].abs();
            let Some(theta) = self.step(j, dir, bland) else {
                return Ok(PhaseEnd::Unbounded);
            };
            self.iterations += 1;
            since_refactor += 1;
            if gain * theta > 1e-12 {
                stall = 0;
            } else {
                stall += 1;
                if stall > stall_limit {
                    bland = true;
                }
            }
            if since_refactor >= REFACTOR_INTERVAL {
                self.refactor()?;
                since_refactor = 0;
            }
        }
    }
}

/// Solve the LP relaxation of `problem` (integrality ignored).
pub fn solve_lp(problem: &MilpProblem) -> Solution {
    let lower: Vec<f64> = problem.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = problem.variables.iter().map(|v| v.upper).collect();
    solve_lp_with_bounds(problem, &lower, &upper)
}

fn terminal(status: SolveStatus, iterations: usize, message: Option<String>) -> Solution {
    Solution {
        status,
        objective: f64::NAN,
        values: Vec::new(),
        duals: None,
        relaxation_bound: None,
        best_bound: None,
        iterations,
        nodes: 0,
        message,
    }
}

/// LP relaxation with the variable bounds replaced by `lower`/`upper`.
pub(crate) fn solve_lp_with_bounds(problem: &MilpProblem, lower: &[f64], upper: &[f64]) -> Solution {
    let nvars = problem.num_variables();
    for j in 0..nvars {
        if lower[j] > upper[j] + 1e-12 * (1.0 + lower[j].abs()) {
            return terminal(
                SolveStatus::Infeasible,
                0,
                Some(format!("variable {} has empty bounds", problem.variables[j].name)),
            );
        }
    }

    // presolve: drop fixed variables and rows left without free variables
    let fixed: Vec<bool> = (0..nvars).map(|j| upper[j] <= lower[j]).collect();
    let mut col_of = vec![usize::MAX; nvars];
    let mut active = Vec::new();
    for j in 0..nvars {
        if !fixed[j] {
            col_of[j] = active.len();
            active.push(j);
        }
    }
    let n_s = active.len();

    struct Row {
        orig: usize,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut rows = Vec::new();
    for (ri, c) in problem.constraints.iter().enumerate() {
        let mut rhs = c.rhs;
        let mut merged: std::collections::BTreeMap<usize, f64> = Default::default();
        for &(j, a) in &c.coefficients {
            if fixed[j] {
                rhs -= a * lower[j];
            } else {
                *merged.entry(col_of[j]).or_insert(0.0) += a;
            }
        }
        let coeffs: Vec<(usize, f64)> = merged.into_iter().filter(|(_, a)| *a != 0.0).collect();
        if coeffs.is_empty() {
            let tol = FEASIBILITY_TOL * 1e-3 * (1.0 + c.rhs.abs());
            let ok = match c.sense {
                Sense::Le => rhs >= -tol,
                Sense::Ge => rhs <= tol,
                Sense::Eq => rhs.abs() <= tol,
            };
            if !ok {
                return terminal(
                    SolveStatus::Infeasible,
                    0,
                    Some(format!("row {} cannot be satisfied by fixed variables", c.name)),
                );
            }
            continue;
        }
        rows.push(Row {
            orig: ri,
            coeffs,
            sense: c.sense,
            rhs,
        });
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let art_start = n_s + n_slack;
    let ncols = art_start + m;

    let mut a = vec![0.0; m * ncols];
    let mut b = vec![0.0; m];
    let mut lo = vec![0.0; ncols];
    let mut hi = vec![f64::INFINITY; ncols];
    let mut cost2 = vec![0.0; ncols];
    let mut slack = n_s;
    for (i, row) in rows.iter().enumerate() {
        for &(c, v) in &row.coeffs {
            a[i * ncols + c] = v;
        }
        match row.sense {
            Sense::Le => {
                a[i * ncols + slack] = 1.0;
                slack += 1;
            }
            Sense::Ge => {
                a[i * ncols + slack] = -1.0;
                slack += 1;
            }
            Sense::Eq => {}
        }
        b[i] = row.rhs;
    }
    let cmax = active
        .iter()
        .map(|&j| problem.variables[j].cost.abs())
        .fold(0.0, f64::max);
    let obj_scale = if cmax > 0.0 { 1.0 / cmax } else { 1.0 };
    for (c, &j) in active.iter().enumerate() {
        lo[c] = lower[j];
        hi[c] = upper[j];
        cost2[c] = problem.variables[j].cost * obj_scale;
    }

    let mut x = vec![0.0; ncols];
    let mut state = vec![State::Lower; ncols];
    for c in 0..n_s {
        if lo[c].is_finite() {
            x[c] = lo[c];
        } else if hi[c].is_finite() {
            x[c] = hi[c];
            state[c] = State::Upper;
        } else {
            state[c] = State::Free;
        }
    }
    let mut sign = vec![1.0; m];
    let mut tab = a.clone();
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut r = b[i];
        for c in 0..n_s {
            let v = a[i * ncols + c];
            if v != 0.0 {
                r -= v * x[c];
            }
        }
        sign[i] = if r >= 0.0 { 1.0 } else { -1.0 };
        let art = art_start + i;
        a[i * ncols + art] = sign[i];
        tab[i * ncols + art] = sign[i];
        for v in &mut tab[i * ncols..(i + 1) * ncols] {
            *v *= sign[i];
        }
        x[art] = r.abs();
        state[art] = State::Basic(i);
        basis.push(art);
    }

    let mut cost1 = vec![0.0; ncols];
    for c in cost1.iter_mut().skip(art_start) {
        *c = 1.0;
    }
    let mut t = Tableau {
        m,
        ncols,
        a,
        b,
        lo,
        hi,
        cost: cost1,
        tab,
        x,
        d: vec![0.0; ncols],
        basis,
        state,
        iterations: 0,
    };
    t.recompute_reduced_costs();

    let limit = 20_000 + 50 * (m + ncols);
    let bnorm = t.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    match t.run_phase(limit) {
        Ok(_) => {}
        Err(e) => return terminal(SolveStatus::NumericalFailure, t.iterations, Some(e.message())),
    }
    let infeasibility: f64 = (art_start..ncols).map(|c| t.x[c]).sum();
    if infeasibility > 1e-9 * (1.0 + bnorm) {
        return terminal(
            SolveStatus::Infeasible,
            t.iterations,
            Some(format!("phase 1 ended with infeasibility {infeasibility:e}")),
        );
    }

    for c in art_start..ncols {
        t.hi[c] = 0.0;
        if !matches!(t.state[c], State::Basic(_)) {
            t.x[c] = 0.0;
            t.state[c] = State::Lower;
        }
    }
    t.cost = cost2;
    if let Err(e) = t.refactor() {
        return terminal(SolveStatus::NumericalFailure, t.iterations, Some(e.message()));
    }
    let end = match t.run_phase(limit) {
        Ok(end) => end,
        Err(e) => return terminal(SolveStatus::NumericalFailure, t.iterations, Some(e.message())),
    };
    if let PhaseEnd::Unbounded = end {
        return terminal(SolveStatus::Unbounded, t.iterations, None);
    }

    let mut values: Vec<f64> = lower.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
    for (c, &j) in active.iter().enumerate() {
        let mut v = t.x[c];
        // snap round-off back onto the bound it came from
        if v < lower[j] && lower[j] - v <= 1e-9 * (1.0 + lower[j].abs()) {
            v = lower[j];
        }
        if v > upper[j] && v - upper[j] <= 1e-9 * (1.0 + upper[j].abs()) {
            v = upper[j];
        }
        values[j] = v;
    }
    let scale = 1.0 + problem.rhs_norm();
    let residual = problem.max_row_violation(&values);
    let bound_violation = (0..nvars)
        .map(|j| (lower[j] - values[j]).max(values[j] - upper[j]).max(0.0))
        .fold(0.0, f64::max);
    if residual > FEASIBILITY_TOL * scale || bound_violation > FEASIBILITY_TOL * scale {
        return terminal(
            SolveStatus::NumericalFailure,
            t.iterations,
            Some(format!(
                "final residual {residual:e} / bound violation {bound_violation:e} exceeds tolerance"
            )),
        );
    }

    let mut duals = vec![0.0; problem.num_constraints()];
    for (i, row) in rows.iter().enumerate() {
        duals[row.orig] = -t.d[art_start + i] * sign[i] / obj_scale;
    }

    let objective = problem.objective(&values);
    Solution {
        status: SolveStatus::Optimal,
        objective,
        values,
        duals: Some(duals),
        relaxation_bound: Some(objective),
        best_bound: Some(objective),
        iterations: t.iterations,
        nodes: 0,
        message: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::problem::{Constraint, Variable};

    fn toy() -> MilpProblem {
        // min 2x + 3y  s.t. x + y >= 4, x <= 3, y <= 10
        let mut p = MilpProblem::new();
        let x = p.add_variable(Variable::continuous("x", 0.0, 3.0, 2.0));
        let y = p.add_variable(Variable::continuous("y", 0.0, 10.0, 3.0));
        p.add_constraint(Constraint::new("cover", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0));
        p
    }

    #[test]
    fn solves_small_lp() {
        let s = solve_lp(&toy());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - 9.0).abs() < 1e-9);
        assert!((s.values[0] - 3.0).abs() < 1e-9);
        assert!((s.values[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duals_certify_optimum() {
        let p = toy();
        let s = solve_lp(&p);
        let bound = p.lagrangian_bound(s.duals.as_ref().unwrap(), 1e-9);
        assert!((bound - s.objective).abs() < 1e-7, "{bound} vs {}", s.objective);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = toy();
        p.add_constraint(Constraint::new("cap", vec![(0, 1.0), (1, 1.0)], Sense::Le, 2.0));
        assert_eq!(solve_lp(&p).status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut p = MilpProblem::new();
        let x = p.add_variable(Variable::continuous("x", 0.0, f64::INFINITY, -1.0));
        let y = p.add_variable(Variable::continuous("y", 0.0, f64::INFINITY, 0.0));
        p.add_constraint(Constraint::new("r", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0));
        assert_eq!(solve_lp(&p).status, SolveStatus::Unbounded);
    }

    #[test]
    fn free_variable_and_equality() {
        // min x + y s.t. x - y = -2, y <= 5, x free
        let mut p = MilpProblem::new();
        let x = p.add_variable(Variable::continuous("x", f64::NEG_INFINITY, f64::INFINITY, 1.0));
        let y = p.add_variable(Variable::continuous("y", 0.0, 5.0, 1.0));
        p.add_constraint(Constraint::new("e", vec![(x, 1.0), (y, -1.0)], Sense::Eq, -2.0));
        let s = solve_lp(&p);
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 2.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_variables_are_presolved() {
        let mut p = toy();
        p.variables[0].upper = 0.0;
        let s = solve_lp(&p);
        assert!((s.objective - 12.0).abs() < 1e-9);
        assert_eq!(s.values[0], 0.0);
    }
}
