mod common;

use common::{close, integer_optimum, random_problem, vertex_optimum};
use lunar_logistics::milp::{solve_lp, solve_milp, Constraint, MilpProblem, Sense, SolveStatus, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for case in 0..400 {
        let n = rng.gen_range(1..=6);
        let p = random_problem(&mut rng, n, 0, 4);
        let got = solve_lp(&p);
        match vertex_optimum(&p) {
            Some(z) => {
                assert_eq!(got.status, SolveStatus::Optimal, "case {case}: {p:?}");
                assert!(close(got.objective, z, 1e-7), "case {case}: {} vs {z}", got.objective);
                assert!(p.max_row_violation(&got.values) <= 1e-6 * (1.0 + p.rhs_norm()));
                assert!(p.max_bound_violation(&got.values) <= 1e-9);
            }
            None => assert_eq!(got.status, SolveStatus::Infeasible, "case {case}: {p:?}"),
        }
    }
}

#[test]
fn milp_matches_integer_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for case in 0..150 {
        let ints = rng.gen_range(1..=3);
        let conts = rng.gen_range(0..=3);
        let p = random_problem(&mut rng, conts, ints, 4);
        let got = solve_milp(&p);
        match integer_optimum(&p) {
            Some(z) => {
                assert_eq!(got.status, SolveStatus::Optimal, "case {case}: {p:?}");
                assert!(close(got.objective, z, 1e-9), "case {case}: {} vs {z}", got.objective);
            }
            None => assert_eq!(got.status, SolveStatus::Infeasible, "case {case}: {p:?}"),
        }
    }
}

#[test]
fn duals_give_a_valid_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let p = random_problem(&mut rng, n, 0, 4);
        let got = solve_lp(&p);
        if got.status != SolveStatus::Optimal {
            continue;
        }
        let duals = got.duals.as_ref().expect("optimal LPs carry duals");
        let bound = p.lagrangian_bound(duals, 1e-9);
        assert!(bound <= got.objective + 1e-6 * (1.0 + got.objective.abs()));
        assert!(close(bound, got.objective, 1e-6), "{bound} vs {}", got.objective);
    }
}

#[test]
fn unbounded_lp_is_reported() {
    let mut p = MilpProblem::new();
    let x = p.add_variable(Variable::continuous("x", 0.0, f64::INFINITY, -1.0));
    let y = p.add_variable(Variable::continuous("y", 0.0, f64::INFINITY, 0.0));
    p.add_constraint(Constraint::new("r", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0));
    assert_eq!(solve_lp(&p).status, SolveStatus::Unbounded);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's classic cycling instance
    let mut p = MilpProblem::new();
    let c = [-0.75, 150.0, -0.02, 6.0];
    let v: Vec<usize> = c
        .iter()
        .enumerate()
        .map(|(j, c)| p.add_variable(Variable::continuous(format!("x{j}"), 0.0, f64::INFINITY, *c)))
        .collect();
    p.add_constraint(Constraint::new("a", vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], Sense::Le, 0.0));
    p.add_constraint(Constraint::new("b", vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], Sense::Le, 0.0));
    p.add_constraint(Constraint::new("c", vec![(v[2], 1.0)], Sense::Le, 1.0));
    let got = solve_lp(&p);
    assert_eq!(got.status, SolveStatus::Optimal);
    assert!(close(got.objective, -0.05, 1e-9), "{}", got.objective);
}
