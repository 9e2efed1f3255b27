//! Structured solve reports and CSV exports.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::milp::{FlowRecord, SolveStatus};
use crate::network::{ids, ArcKind, CommodityId, CostClass, NodeKind};
use crate::replay::{ByproductTotals, Ledger, Verdict};
use crate::scenario::{ScenarioModel, ScenarioOutcome};
use crate::transform::{propellant_factor, Component, MRE_METAL_SPLIT};

/// Ledger cells smaller than this are left out of reports.
const CELL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub launch: f64,
    pub propellant: f64,
    pub hardware: f64,
    pub operations: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantReport {
    pub mass_kg: f64,
    /// Drawn (negative) or generated (positive).
    pub power_kw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerCell {
    pub node: String,
    pub timestep: usize,
    pub commodity: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scenario: String,
    pub isru_enabled: bool,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub lp_bound: Option<f64>,
    pub best_bound: Option<f64>,
    pub iterations: usize,
    pub nodes: usize,
    pub costs: Option<CostBreakdown>,
    /// Vehicles built and launched.
    pub vehicles: f64,
    /// Vehicle departures on propulsive legs.
    pub flights: f64,
    pub propellant_kg: f64,
    pub plants: BTreeMap<String, PlantReport>,
    pub power_demand_kw: f64,
    pub power_supply_kw: f64,
    pub byproducts: ByproductTotals,
    /// MRE metals by species, kg.
    pub metal_split: BTreeMap<String, f64>,
    /// Consumables arriving at the habitat, kg.
    pub delivered_to_habitat: BTreeMap<String, f64>,
    /// Everything lifted off Earth, kg (vehicles by count).
    pub launched_from_earth: BTreeMap<String, f64>,
    pub replay: Option<Verdict>,
    pub ledger: Vec<LedgerCell>,
    pub flows: Vec<FlowRecord>,
}

fn ledger_cells(ledger: &Ledger, model: &ScenarioModel) -> Vec<LedgerCell> {
    ledger
        .cells()
        .filter(|(.., v)| v.abs() > CELL_EPS)
        .map(|(n, t, c, v)| LedgerCell {
            node: model.graph.nodes[n].id.clone(),
            timestep: t,
            commodity: model.graph.registry.name(c).to_string(),
            value: v,
        })
        .collect()
}

/// Summarise a solved scenario. Deterministic for a given outcome.
pub fn build_report(outcome: &ScenarioOutcome) -> SolveReport {
    let model = &outcome.model;
    let graph = &model.graph;
    let reg = &graph.registry;
    let solution = &outcome.solution;
    let point = !solution.values.is_empty();
    let flow = |i: usize, c: CommodityId| if point { crate::milp::clamp(solution.flow(&outcome.problem, i, c)) } else { 0.0 };

    let mut vehicles = 0.0;
    let mut flights = 0.0;
    let mut propellant_kg = 0.0;
    let mut plants: BTreeMap<String, PlantReport> = BTreeMap::new();
    let mut delivered: BTreeMap<String, f64> = BTreeMap::new();
    let mut launched: BTreeMap<String, f64> = BTreeMap::new();

    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        let from = &graph.nodes[graph.node_index(&arc.from).expect("known node")];
        let to = &graph.nodes[graph.node_index(&arc.to).expect("known node")];
        if arc.kind == ArcKind::Transport && from.kind == NodeKind::Earth && to.id != from.id {
            vehicles += flow(i, ids::SPACECRAFT);
            for c in reg.ids() {
                let v = flow(i, c);
                if v > 0.0 {
                    *launched.entry(reg.name(c).to_string()).or_insert(0.0) += v;
                }
            }
        }
        if let Some(dv) = model.delta_v.get(&arc.from, &arc.to) {
            if arc.kind == ArcKind::Transport {
                let sc = flow(i, ids::SPACECRAFT);
                flights += sc;
                let payload: f64 = reg.ids().filter(|&c| c != ids::SPACECRAFT && c != ids::POWER).map(|c| flow(i, c)).sum();
                propellant_kg += propellant_factor(dv, &model.propulsion) * (payload + model.propulsion.structure_mass * sc);
            }
        }
        if arc.kind == ArcKind::Transport && to.id == model.habitat && from.id != model.habitat {
            for c in [ids::O2, ids::H2, ids::H2O] {
                *delivered.entry(reg.name(c).to_string()).or_insert(0.0) += flow(i, c);
            }
        }
        if arc.kind == ArcKind::Transformation {
            for component in Component::ALL {
                let mass = flow(i, component.plant_commodity());
                let power = model.rates.get(&component).map(|r| r.power_kw_per_kg).unwrap_or(0.0) * mass;
                let entry = plants.entry(component.name().to_string()).or_insert(PlantReport {
                    mass_kg: 0.0,
                    power_kw: 0.0,
                });
                if mass > entry.mass_kg {
                    *entry = PlantReport { mass_kg: mass, power_kw: power };
                }
            }
        }
    }

    let power_demand_kw = -plants.values().filter(|p| p.power_kw < 0.0).map(|p| p.power_kw).sum::<f64>();
    let power_supply_kw = plants.values().filter(|p| p.power_kw > 0.0).map(|p| p.power_kw).sum::<f64>();

    let (costs, byproducts, ledger, flows) = match &outcome.plan {
        Some(plan) => {
            let class = |c| plan.costs.get(&c).copied().unwrap_or(0.0);
            let costs = CostBreakdown {
                launch: class(CostClass::Launch),
                propellant: class(CostClass::Propellant),
                hardware: class(CostClass::Hardware),
                operations: class(CostClass::Operations),
                total: plan.costs.values().sum(),
            };
            (Some(costs), plan.byproducts, ledger_cells(&plan.ledger, model), plan.flows.clone())
        }
        None => (None, ByproductTotals::default(), Vec::new(), Vec::new()),
    };
    let split_total: f64 = MRE_METAL_SPLIT.iter().map(|(_, v)| v).sum();
    let metal_split = MRE_METAL_SPLIT
        .iter()
        .map(|(species, v)| (species.to_string(), byproducts.metals * v / split_total))
        .collect();
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };

    SolveReport {
        scenario: model.config.name.clone(),
        isru_enabled: model.config.isru_enabled,
        status: solution.status,
        objective: if point { finite(solution.objective) } else { None },
        lp_bound: solution.relaxation_bound.and_then(finite),
        best_bound: solution.best_bound.and_then(finite),
        iterations: solution.iterations,
        nodes: solution.nodes,
        costs,
        vehicles,
        flights,
        propellant_kg,
        plants,
        power_demand_kw,
        power_supply_kw,
        byproducts,
        metal_split,
        delivered_to_habitat: delivered,
        launched_from_earth: launched,
        replay: outcome.replay.as_ref().map(|r| r.verdict.clone()),
        ledger,
        flows,
    }
}

pub fn report_json(report: &SolveReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse_report(text: &str) -> Result<SolveReport, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn flows_csv(flows: &[FlowRecord]) -> String {
    let mut out = String::from("instance,arc,from,to,departure,arrival,commodity,value\n");
    for f in flows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.instance, f.arc, f.from, f.to, f.departure, f.arrival, f.commodity, f.value
        );
    }
    out
}

pub fn ledger_csv(cells: &[LedgerCell]) -> String {
    let mut out = String::from("node,timestep,commodity,value\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{}", c.node, c.timestep, c.commodity, c.value);
    }
    out
}

fn money(v: f64) -> String {
    format!("${:.3}M", v / 1e6)
}

/// Human-readable summary of a report.
pub fn render_summary(r: &SolveReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario      {} (isru {})", r.scenario, if r.isru_enabled { "on" } else { "off" });
    let _ = writeln!(out, "status        {:?}", r.status);
    if let Some(c) = &r.costs {
        let _ = writeln!(out, "total cost    {}", money(c.total));
        let _ = writeln!(
            out,
            "  launch {}  propellant {}  hardware {}  operations {}",
            money(c.launch),
            money(c.propellant),
            money(c.hardware),
            money(c.operations)
        );
    }
    if let Some(b) = r.lp_bound {
        let _ = writeln!(out, "lp bound      {}", money(b));
    }
    let _ = writeln!(out, "vehicles      {}  flights {}  propellant {:.1} kg", r.vehicles, r.flights, r.propellant_kg);
    if r.plants.values().any(|p| p.mass_kg > 0.0) {
        out.push_str("plants\n");
        for (name, p) in &r.plants {
            let _ = writeln!(out, "  {name:<10} {:>10.2} kg {:>9.3} kW", p.mass_kg, p.power_kw);
        }
        let _ = writeln!(out, "power         demand {:.3} kW, supply {:.3} kW", r.power_demand_kw, r.power_supply_kw);
    }
    let b = &r.byproducts;
    let _ = writeln!(
        out,
        "byproducts    slag {:.2} kg  metals {:.2} kg  emissions {:.2} kg",
        b.slag, b.metals, b.emissions
    );
    for (name, v) in &r.launched_from_earth {
        let _ = writeln!(out, "  launched {name:<10} {v:>12.2}");
    }
    match &r.replay {
        Some(v) if v.passed => out.push_str("replay        passed\n"),
        Some(v) => {
            let _ = writeln!(out, "replay        FAILED ({} violations)", v.violations);
            if let Some(first) = &v.first_violation {
                let _ = writeln!(out, "  first: {first}");
            }
        }
        None => out.push_str("replay        not run\n"),
    }
    out
}
