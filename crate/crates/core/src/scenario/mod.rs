//! Scenario files, the baseline networks built from them, and parameter sweeps.

mod build;
mod config;
mod sweep;

use thiserror::Error;

pub use build::{
    build_earth_dependent_scenario, build_isru_scenario, build_scenario, BuildError, ScenarioModel, CARGO,
    PRODUCTION_LABEL, SURFACE_CARGO, WASTE,
};
pub use config::{
    load_scenario, CostConfig, DeltaVEntry, DemandConfig, DemandEntry, DisposalConfig, LegConfig, LegKind,
    NetworkConfig, NodeConfig, PropulsionConfig, RateOverride, RatesConfig, ScenarioConfig, SweepParameter, SweepSpec,
};
pub use sweep::{apply_parameter, run_sweep, run_sweep_sequential, sweep_csv, SweepMetrics, SweepRow, SWEEP_CSV_HEADER};

use crate::milp::{compile, extract_plan, solve_milp, CompileError, MilpProblem, PlanSummary, Solution, SolveStatus};
use crate::network::{validate_graph, Diagnostic};
use crate::replay::{replay, ReplayContext, ReplayOutcome};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("graph failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Graph(Vec<Diagnostic>),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Everything produced by solving one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub model: ScenarioModel,
    pub problem: MilpProblem,
    pub solution: Solution,
    /// Present when the solver returned a point.
    pub plan: Option<PlanSummary>,
    pub replay: Option<ReplayOutcome>,
}

impl ScenarioOutcome {
    pub fn is_optimal(&self) -> bool {
        self.solution.status == SolveStatus::Optimal
    }

    pub fn replay_passed(&self) -> bool {
        self.replay.as_ref().is_some_and(|r| r.verdict.passed)
    }
}

/// Every problem found while building a scenario; empty means it will compile.
pub fn validate_scenario(config: &ScenarioConfig) -> Vec<Diagnostic> {
    if let Err(e) = config.validate() {
        return vec![Diagnostic {
            location: "config".into(),
            message: e.to_string(),
        }];
    }
    match build_scenario(config) {
        Ok(model) => validate_graph(&model.graph),
        Err(e) => vec![Diagnostic {
            location: "network".into(),
            message: e.to_string(),
        }],
    }
}

pub fn replay_context(model: &ScenarioModel) -> ReplayContext<'_> {
    ReplayContext {
        rates: &model.rates,
        maintenance_rate: model.config.maintenance_rate,
        step_years: model.step_years,
        propulsion: model.propulsion,
        delta_v: &model.delta_v,
    }
}

/// Build, compile and solve a scenario, then replay the plan.
pub fn solve_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome, ScenarioError> {
    config.validate()?;
    let model = build_scenario(config)?;
    let diagnostics = validate_graph(&model.graph);
    if !diagnostics.is_empty() {
        return Err(ScenarioError::Graph(diagnostics));
    }
    let problem = compile(&model.graph)?;
    let solution = solve_milp(&problem);
    let (plan, replayed) = if solution.values.is_empty() {
        (None, None)
    } else {
        let plan = extract_plan(&solution, &problem, &model.graph);
        let flows = &solution.values[..model.graph.instances.len() * model.graph.commodity_count()];
        let replayed = replay(flows, &model.graph, &replay_context(&model));
        (Some(plan), Some(replayed))
    };
    Ok(ScenarioOutcome {
        model,
        problem,
        solution,
        plan,
        replay: replayed,
    })
}

/// Scenario files bundled with the library, by name.
pub const SHIPPED: [(&str, &str); 4] = [
    ("isru_baseline", include_str!("../../scenarios/isru_baseline.toml")),
    ("earth_baseline", include_str!("../../scenarios/earth_baseline.toml")),
    ("fig2_sweep", include_str!("../../scenarios/fig2_sweep.toml")),
    ("fig3_sweep", include_str!("../../scenarios/fig3_sweep.toml")),
];

pub fn shipped(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenarios_load_and_validate() {
        for (name, text) in SHIPPED {
            let config = load_scenario(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(validate_scenario(&config).is_empty(), "{name}");
        }
    }

    #[test]
    fn bad_demand_timestep_is_a_diagnostic() {
        let mut config = ScenarioConfig::default();
        config.demands.extra.push(DemandEntry {
            node: "HB".into(),
            commodity: "O2".into(),
            timestep: 12,
            amount: 1.0,
        });
        let diags = validate_scenario(&config);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(matches!(solve_scenario(&config), Err(ScenarioError::Graph(_))));
    }
}
