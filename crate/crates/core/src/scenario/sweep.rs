use std::fmt::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::config::{ScenarioConfig, SweepParameter, SweepSpec};
use super::{solve_scenario, ScenarioError};

pub const SWEEP_CSV_HEADER: &str = "value,total_cost,slag_kg,metals_kg,emissions_kg";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepMetrics {
    pub total_cost: f64,
    pub slag_kg: f64,
    pub metals_kg: f64,
    pub emissions_kg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Metrics, or why the point has none.
    pub outcome: Result<SweepMetrics, String>,
}

/// The config of one sweep point.
pub fn apply_parameter(config: &ScenarioConfig, spec: &SweepSpec, value: f64) -> ScenarioConfig {
    let mut c = config.clone();
    c.sweeps.clear();
    if let Some(isru) = spec.isru_enabled {
        c.isru_enabled = isru;
    }
    match spec.parameter {
        SweepParameter::LaunchCost => c.costs.launch_per_kg = value,
        SweepParameter::ProductivityMultiplier => c.demands.multiplier = value,
    }
    c
}

fn point(config: &ScenarioConfig, spec: &SweepSpec, value: f64) -> SweepRow {
    let outcome = match solve_scenario(&apply_parameter(config, spec, value)) {
        Ok(o) if o.is_optimal() => {
            let plan = o.plan.expect("optimal solves carry a plan");
            Ok(SweepMetrics {
                total_cost: plan.objective,
                slag_kg: plan.byproducts.slag,
                metals_kg: plan.byproducts.metals,
                emissions_kg: plan.byproducts.emissions,
            })
        }
        Ok(o) => Err(format!(
            "solver status {:?}{}",
            o.solution.status,
            o.solution.message.map(|m| format!(": {m}")).unwrap_or_default()
        )),
        Err(e) => Err(e.to_string()),
    };
    SweepRow { value, outcome }
}

fn check(spec: &SweepSpec) -> Result<(), ScenarioError> {
    let invalid = |message: String| ScenarioError::Invalid {
        path: format!("sweeps.{}.values", spec.name),
        message,
    };
    if spec.values.is_empty() {
        return Err(invalid("sweep has no values".into()));
    }
    if let Some(v) = spec.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(invalid(format!("values must be finite and nonnegative, got {v}")));
    }
    if spec.values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("values must be strictly increasing".into()));
    }
    Ok(())
}

/// Solve every sweep point; rows come back in input order.
pub fn run_sweep(config: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>, ScenarioError> {
    check(spec)?;
    #[cfg(feature = "parallel")]
    let rows = spec.values.par_iter().map(|&v| point(config, spec, v)).collect();
    #[cfg(not(feature = "parallel"))]
    let rows = spec.values.iter().map(|&v| point(config, spec, v)).collect();
    Ok(rows)
}

/// [`run_sweep`] on the calling thread only.
pub fn run_sweep_sequential(config: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>, ScenarioError> {
    check(spec)?;
    Ok(spec.values.iter().map(|&v| point(config, spec, v)).collect())
}

/// CSV with one line per row. Failed points keep their value and leave the
/// metric fields empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        match &row.outcome {
            Ok(m) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.value, m.total_cost, m.slag_kg, m.metals_kg, m.emissions_kg
                );
            }
            Err(_) => {
                let _ = writeln!(out, "{},,,,", row.value);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            name: "t".into(),
            parameter: SweepParameter::LaunchCost,
            values,
            isru_enabled: None,
        }
    }

    #[test]
    fn rejects_bad_values() {
        let c = ScenarioConfig::default();
        assert!(run_sweep(&c, &spec(vec![])).is_err());
        assert!(run_sweep(&c, &spec(vec![2.0, 1.0])).is_err());
        assert!(run_sweep(&c, &spec(vec![1.0, 1.0])).is_err());
    }

    #[test]
    fn failed_rows_keep_their_value() {
        let rows = vec![
            SweepRow {
                value: 1.0,
                outcome: Ok(SweepMetrics {
                    total_cost: 2.0,
                    slag_kg: 3.0,
                    metals_kg: 4.0,
                    emissions_kg: 5.0,
                }),
            },
            SweepRow {
                value: 7.5,
                outcome: Err("infeasible".into()),
            },
        ];
        assert_eq!(sweep_csv(&rows), format!("{SWEEP_CSV_HEADER}\n1,2,3,4,5\n7.5,,,,\n"));
    }

    #[test]
    fn apply_sets_parameter() {
        let c = ScenarioConfig::default();
        let mut s = spec(vec![1.0]);
        s.isru_enabled = Some(false);
        let p = apply_parameter(&c, &s, 1234.0);
        assert_eq!(p.costs.launch_per_kg, 1234.0);
        assert!(!p.isru_enabled);
        s.parameter = SweepParameter::ProductivityMultiplier;
        assert_eq!(apply_parameter(&c, &s, 2.0).demands.multiplier, 2.0);
    }
}
