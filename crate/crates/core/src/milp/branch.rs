//! Best-bound branch-and-bound over the integer variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::problem::{MilpProblem, VarKind};
use super::simplex::solve_lp_with_bounds;
use super::{Solution, SolveStatus};

pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct MilpOptions {
    pub node_limit: usize,
    pub integrality_tol: f64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            node_limit: 50_000,
            integrality_tol: INTEGRALITY_TOL,
        }
    }
}

/// Objective, values and the bounds of the node that produced them.
type Incumbent = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

struct Node {
    bound: f64,
    seq: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: smallest bound first, then oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Most fractional integer variable, lowest index on ties.
fn branching_variable(problem: &MilpProblem, values: &[f64], tol: f64) -> Option<usize> {
    let mut pick = None;
    let mut best = tol;
    for (j, v) in problem.variables.iter().enumerate() {
        if v.kind != VarKind::Integer {
            continue;
        }
        let frac = values[j] - values[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist > best {
            best = dist;
            pick = Some(j);
        }
    }
    pick
}

pub fn solve_milp(problem: &MilpProblem) -> Solution {
    solve_milp_with(problem, &MilpOptions::default())
}

pub fn solve_milp_with(problem: &MilpProblem, options: &MilpOptions) -> Solution {
    let mut lower: Vec<f64> = problem.variables.iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = problem.variables.iter().map(|v| v.upper).collect();
    for (j, v) in problem.variables.iter().enumerate() {
        if v.kind == VarKind::Integer {
            lower[j] = (lower[j] - options.integrality_tol).ceil();
            upper[j] = (upper[j] + options.integrality_tol).floor();
        }
    }
    let root = solve_lp_with_bounds(problem, &lower, &upper);
    if root.status != SolveStatus::Optimal {
        return root;
    }
    let relaxation = root.objective;
    let mut iterations = root.iterations;
    let tol = options.integrality_tol;

    if branching_variable(problem, &root.values, tol).is_none() {
        return finish(problem, &lower, &upper, root.values, relaxation, relaxation, iterations, 1, tol);
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: root.objective,
        seq,
        lower,
        upper,
        values: root.values,
    });
    let mut incumbent: Option<Incumbent> = None;
    let mut nodes = 1usize;
    let prune_gap = |inc: f64| 1e-9 * inc.abs().max(1.0);

    while let Some(node) = heap.pop() {
        if let Some((inc, ..)) = &incumbent {
            if node.bound >= inc - prune_gap(*inc) {
                heap.clear();
                break;
            }
        }
        if nodes >= options.node_limit {
            let best_bound = node.bound;
            heap.push(node);
            let mut out = match incumbent {
                Some((obj, values, ..)) => Solution {
                    objective: obj,
                    values,
                    ..Solution::empty(SolveStatus::NodeLimit)
                },
                None => Solution::empty(SolveStatus::NodeLimit),
            };
            out.relaxation_bound = Some(relaxation);
            out.best_bound = Some(best_bound);
            out.iterations = iterations;
            out.nodes = nodes;
            out.message = Some(format!("node limit {} reached", options.node_limit));
            return out;
        }
        let Some(j) = branching_variable(problem, &node.values, tol) else {
            continue;
        };
        let v = node.values[j];
        let children = [
            (node.lower[j], v.floor()), // down
            (v.ceil(), node.upper[j]),  // up
        ];
        for (lo_j, hi_j) in children {
            if lo_j > hi_j {
                continue;
            }
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            lower[j] = lo_j;
            upper[j] = hi_j;
            let child = solve_lp_with_bounds(problem, &lower, &upper);
            nodes += 1;
            iterations += child.iterations;
            match child.status {
                SolveStatus::Optimal => {}
                SolveStatus::Infeasible => continue,
                _ => {
                    let mut out = child;
                    out.relaxation_bound = Some(relaxation);
                    out.nodes = nodes;
                    return out;
                }
            }
            if let Some((inc, ..)) = &incumbent {
                if child.objective >= inc - prune_gap(*inc) {
                    continue;
                }
            }
            if branching_variable(problem, &child.values, tol).is_none() {
                incumbent = Some((child.objective, child.values, lower, upper));
            } else {
                seq += 1;
                heap.push(Node {
                    bound: child.objective,
                    seq,
                    lower,
                    upper,
                    values: child.values,
                });
            }
        }
    }

    match incumbent {
        Some((obj, values, lower, upper)) => {
            finish(problem, &lower, &upper, values, relaxation, obj, iterations, nodes, tol)
        }
        None => Solution {
            relaxation_bound: Some(relaxation),
            iterations,
            nodes,
            ..Solution::empty(SolveStatus::Infeasible)
        },
    }
}

/// Round the integer part of an integral LP solution and re-solve the
/// continuous part with it fixed, so reported values are exactly integral.
#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &MilpProblem,
    lower: &[f64],
    upper: &[f64],
    values: Vec<f64>,
    relaxation: f64,
    objective: f64,
    iterations: usize,
    nodes: usize,
    tol: f64,
) -> Solution {
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    let mut any_integer = false;
    for (j, v) in problem.variables.iter().enumerate() {
        if v.kind == VarKind::Integer {
            let r = values[j].round();
            lo[j] = r;
            hi[j] = r;
            any_integer = true;
        }
    }
    let polished = if any_integer {
        solve_lp_with_bounds(problem, &lo, &hi)
    } else {
        solve_lp_with_bounds(problem, lower, upper)
    };
    let mut out = if polished.status == SolveStatus::Optimal
        && polished.objective <= objective + 1e-9 * objective.abs().max(1.0) + tol
    {
        polished
    } else {
        let mut values = values;
        for (j, v) in problem.variables.iter().enumerate() {
            if v.kind == VarKind::Integer {
                values[j] = values[j].round();
            }
        }
        Solution {
            objective: problem.objective(&values),
            values,
            ..Solution::empty(SolveStatus::Optimal)
        }
    };
    if any_integer {
        // multipliers of the fixed-integer LP are not duals of the relaxation
        out.duals = None;
    }
    out.relaxation_bound = Some(relaxation);
    out.best_bound = Some(out.objective);
    out.iterations += iterations;
    out.nodes = nodes;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::problem::{Constraint, Sense, Variable};
    use crate::milp::solve_lp;

    #[test]
    fn rounds_vehicle_count_up() {
        // carry 13 units, 10 per vehicle, vehicle costs 100, cargo costs 1
        let mut p = MilpProblem::new();
        let cargo = p.add_variable(Variable::continuous("cargo", 0.0, f64::INFINITY, 1.0));
        let n = p.add_variable(Variable::integer("vehicles", 0.0, 3.0, 100.0));
        p.add_constraint(Constraint::new("demand", vec![(cargo, 1.0)], Sense::Eq, 13.0));
        p.add_constraint(Constraint::new("cap", vec![(cargo, 1.0), (n, -10.0)], Sense::Le, 0.0));
        let lp = solve_lp(&p);
        assert!((lp.values[n] - 1.3).abs() < 1e-9);
        let s = solve_milp(&p);
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values[n], 2.0);
        assert!((s.objective - 213.0).abs() < 1e-9);
        assert!(s.relaxation_bound.unwrap() <= s.objective);
    }

    #[test]
    fn no_integers_matches_lp() {
        let mut p = MilpProblem::new();
        let x = p.add_variable(Variable::continuous("x", 0.0, 4.0, -1.0));
        p.add_constraint(Constraint::new("r", vec![(x, 2.0)], Sense::Le, 5.0));
        let a = solve_lp(&p);
        let b = solve_milp(&p);
        assert_eq!(a.values, b.values);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn integer_infeasible() {
        let mut p = MilpProblem::new();
        let cargo = p.add_variable(Variable::continuous("cargo", 0.0, f64::INFINITY, 1.0));
        let n = p.add_variable(Variable::integer("vehicles", 0.0, 0.0, 100.0));
        p.add_constraint(Constraint::new("demand", vec![(cargo, 1.0)], Sense::Eq, 1.0));
        p.add_constraint(Constraint::new("cap", vec![(cargo, 1.0), (n, -10.0)], Sense::Le, 0.0));
        assert_eq!(solve_milp(&p).status, SolveStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_gap() {
        let mut p = MilpProblem::new();
        let xs: Vec<usize> = (0..6)
            .map(|i| p.add_variable(Variable::integer(format!("x{i}"), 0.0, 1.0, -(i as f64 + 1.0))))
            .collect();
        p.add_constraint(Constraint::new(
            "knap",
            xs.iter().map(|&j| (j, 2.0 + j as f64 * 0.37)).collect(),
            Sense::Le,
            7.3,
        ));
        let s = solve_milp_with(&p, &MilpOptions { node_limit: 2, ..Default::default() });
        assert_eq!(s.status, SolveStatus::NodeLimit);
        assert!(s.best_bound.is_some());
    }
}
