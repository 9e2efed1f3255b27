//! The flow MILP: compilation from a time-expanded graph, a bounded-variable
//! primal simplex for the relaxation, and branch-and-bound on top.

mod branch;
mod lp_format;
mod plan;
mod problem;
mod simplex;

use serde::{Deserialize, Serialize};

pub use branch::{solve_milp, solve_milp_with, MilpOptions, INTEGRALITY_TOL};
pub use lp_format::write_lp;
pub use plan::{extract_plan, FlowRecord, PlanSummary};
pub(crate) use plan::clamp;
pub use problem::{compile, CompileError, Constraint, FlowKey, MilpProblem, RowOrigin, Sense, VarKind, Variable};
pub use simplex::{solve_lp, FEASIBILITY_TOL, OPTIMALITY_TOL};

use crate::network::CommodityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Branch-and-bound stopped early; the incumbent (if any) is returned.
    NodeLimit,
    /// Singular basis, iteration limit or a residual check failure.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    /// One value per problem variable; empty unless a point was found.
    pub values: Vec<f64>,
    /// Row multipliers of an LP solve, in the sign convention of
    /// [`MilpProblem::lagrangian_bound`].
    pub duals: Option<Vec<f64>>,
    /// Objective of the root LP relaxation.
    pub relaxation_bound: Option<f64>,
    /// Best proven lower bound.
    pub best_bound: Option<f64>,
    pub iterations: usize,
    pub nodes: usize,
    pub message: Option<String>,
}

impl Solution {
    pub(crate) fn empty(status: SolveStatus) -> Self {
        Solution {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            duals: None,
            relaxation_bound: None,
            best_bound: None,
            iterations: 0,
            nodes: 0,
            message: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Flow of `commodity` on arc instance `instance` of a compiled graph.
    pub fn flow(&self, problem: &MilpProblem, instance: usize, commodity: CommodityId) -> f64 {
        self.values[problem.flow_index(instance, commodity)]
    }
}
