use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MilpProblem, Solution};
use crate::network::{CostClass, TimeExpandedGraph};
use crate::replay::{byproduct_totals, ByproductTotals, Ledger};

/// Flows below this are reported as zero.
const REPORT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub instance: usize,
    pub arc: String,
    pub from: String,
    pub to: String,
    pub departure: usize,
    pub arrival: usize,
    pub commodity: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct PlanSummary {
    pub objective: f64,
    /// Nonzero flows, clamped at zero, in (instance, commodity) order.
    pub flows: Vec<FlowRecord>,
    /// Solver-side stocks, computed with the compiled transformation matrices.
    pub ledger: Ledger,
    pub byproducts: ByproductTotals,
    pub costs: BTreeMap<CostClass, f64>,
}

pub(crate) fn clamp(v: f64) -> f64 {
    if v < REPORT_EPS {
        0.0
    } else {
        v
    }
}

/// Ledgers, byproduct totals and cost decomposition of a solved graph MILP.
pub fn extract_plan(solution: &Solution, problem: &MilpProblem, graph: &TimeExpandedGraph) -> PlanSummary {
    let n = graph.registry.len();
    let mut flows = Vec::new();
    let mut ledger = Ledger::zeros(graph.nodes.len(), graph.horizon, n);
    let mut costs: BTreeMap<CostClass, f64> = [
        CostClass::Launch,
        CostClass::Propellant,
        CostClass::Hardware,
        CostClass::Operations,
    ]
    .into_iter()
    .map(|c| (c, 0.0))
    .collect();

    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        let x: Vec<f64> = graph.registry.ids().map(|c| solution.flow(problem, i, c)).collect();
        let to = graph.node_index(&arc.to).expect("known node");
        for k in graph.registry.ids() {
            let arrived: f64 = graph.registry.ids().map(|c| arc.q_entry(k, c) * x[c.0]).sum();
            ledger.add(to, inst.arrival, k, arrived);
            let v = clamp(x[k.0]);
            if v > 0.0 {
                flows.push(FlowRecord {
                    instance: i,
                    arc: arc.label.clone(),
                    from: arc.from.clone(),
                    to: arc.to.clone(),
                    departure: inst.departure,
                    arrival: inst.arrival,
                    commodity: graph.registry.name(k).to_string(),
                    value: v,
                });
            }
        }
        for term in &arc.costs {
            *costs.entry(term.class).or_insert(0.0) += term.coefficient * clamp(x[term.commodity.0]);
        }
    }
    for (ni, node) in graph.nodes.iter().enumerate() {
        for (&(c, t), d) in &node.demand {
            ledger.add(ni, t, c, -d);
        }
    }

    let byproducts = byproduct_totals(&ledger, graph);
    PlanSummary {
        objective: solution.objective,
        flows,
        ledger,
        byproducts,
        costs,
    }
}
