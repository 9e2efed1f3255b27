//! Independent forward replay of a solved plan.
//!
//! The replay walks every node and timestep and recomputes arrivals from the
//! plan's flows. Production arcs are re-derived straight from the component
//! rate tables (never from the compiled transformation matrices), propulsive
//! legs are re-checked with the rocket equation, and the result is compared
//! against demands, storage rules, power supply and time windows.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::network::{ArcKind, CommodityId, NodeKind, TimeExpandedGraph, Unit};
use crate::transform::{propellant_for_leg, Component, DeltaVTable, PropulsionSpec, RateTable};

/// Absolute stock tolerance in kg.
pub const STOCK_TOL: f64 = 1e-6;
/// Relative mass-balance tolerance.
pub const BALANCE_TOL: f64 = 1e-6;

/// On-hand quantity per (node, timestep, commodity): everything that arrived
/// at the node during the step, less its demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    nodes: usize,
    horizon: usize,
    commodities: usize,
    stocks: Vec<f64>,
}

impl Ledger {
    pub fn zeros(nodes: usize, horizon: usize, commodities: usize) -> Self {
        Ledger {
            nodes,
            horizon,
            commodities,
            stocks: vec![0.0; nodes * horizon * commodities],
        }
    }

    fn idx(&self, node: usize, timestep: usize, commodity: CommodityId) -> usize {
        (node * self.horizon + timestep) * self.commodities + commodity.0
    }

    pub fn get(&self, node: usize, timestep: usize, commodity: CommodityId) -> f64 {
        self.stocks[self.idx(node, timestep, commodity)]
    }

    pub fn add(&mut self, node: usize, timestep: usize, commodity: CommodityId, value: f64) {
        let i = self.idx(node, timestep, commodity);
        self.stocks[i] += value;
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, CommodityId, f64)> + '_ {
        (0..self.nodes).flat_map(move |n| {
            (0..self.horizon).flat_map(move |t| {
                (0..self.commodities).map(move |c| (n, t, CommodityId(c), self.get(n, t, CommodityId(c))))
            })
        })
    }

    /// Largest cell difference relative to `1 + |cell|`.
    pub fn max_relative_difference(&self, other: &Ledger) -> f64 {
        self.stocks
            .iter()
            .zip(&other.stocks)
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs().max(b.abs())))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ByproductTotals {
    pub slag: f64,
    pub metals: f64,
    pub emissions: f64,
    pub dsoil_surplus: f64,
}

/// Byproducts held by the disposal nodes at the end of the horizon.
pub fn byproduct_totals(ledger: &Ledger, graph: &TimeExpandedGraph) -> ByproductTotals {
    let reg = &graph.registry;
    let last = graph.final_timestep();
    let mut totals = ByproductTotals::default();
    for (ni, node) in graph.nodes.iter().enumerate() {
        if node.kind != NodeKind::Disposal {
            continue;
        }
        let stock = |name: &str| reg.lookup(name).map(|c| ledger.get(ni, last, c).max(0.0)).unwrap_or(0.0);
        totals.slag += stock("slag");
        totals.metals += stock("metals");
        totals.emissions += stock("emissions");
        totals.dsoil_surplus += stock("dsoil");
    }
    totals
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    WindowClosedFlow,
    NegativeFlow,
    NegativeInflow,
    PowerDeficit,
    PropellantCapacity,
    ConcurrencyBound,
    Imbalance,
    DemandUnmet,
    NegativeStock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: String,
    pub commodity: String,
    pub timestep: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} at node {} t={} ({}): {}",
            self.kind, self.node, self.timestep, self.commodity, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub violations: usize,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub ledger: Ledger,
    pub verdict: Verdict,
}

/// Physical parameters the replay recomputes effects from.
#[derive(Debug, Clone, Copy)]
pub struct ReplayContext<'a> {
    pub rates: &'a RateTable,
    pub maintenance_rate: f64,
    pub step_years: f64,
    pub propulsion: PropulsionSpec,
    pub delta_v: &'a DeltaVTable,
}

fn production_inflow(
    outflow: &[f64],
    graph: &TimeExpandedGraph,
    ctx: &ReplayContext<'_>,
) -> Vec<f64> {
    let reg = &graph.registry;
    let mut inflow = outflow.to_vec();
    let power = reg.lookup("power");
    let spares = reg.lookup("spares");
    for component in Component::ALL {
        let Some(plant) = reg.lookup(component.name()) else { continue };
        let mass = outflow[plant.0];
        if mass == 0.0 {
            continue;
        }
        if let Some(table) = ctx.rates.get(&component) {
            for (name, rate) in &table.products {
                if let Some(c) = reg.lookup(name) {
                    inflow[c.0] += rate * mass * ctx.step_years;
                }
            }
            for (name, rate) in &table.consumptions {
                if let Some(c) = reg.lookup(name) {
                    inflow[c.0] -= rate * mass * ctx.step_years;
                }
            }
            if let Some(p) = power {
                inflow[p.0] += table.power_kw_per_kg * mass;
            }
        }
        if let Some(s) = spares {
            inflow[s.0] -= ctx.maintenance_rate * mass * ctx.step_years;
        }
    }
    inflow
}

/// Replay `flows` (indexed `instance * commodities + commodity`) over `graph`.
pub fn replay(flows: &[f64], graph: &TimeExpandedGraph, ctx: &ReplayContext<'_>) -> ReplayOutcome {
    let n = graph.registry.len();
    let reg = &graph.registry;
    let mut violations: Vec<Violation> = Vec::new();
    let mut ledger = Ledger::zeros(graph.nodes.len(), graph.horizon, n);
    let mut departures = Ledger::zeros(graph.nodes.len(), graph.horizon, n);
    let node_index = |id: &str| graph.node_index(id).expect("graph arcs reference known nodes");
    let spacecraft = reg.lookup("spacecraft");

    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        let outflow = &flows[i * n..(i + 1) * n];
        let from = node_index(&arc.from);
        let to = node_index(&arc.to);
        let mut flag = |kind, commodity: CommodityId, node: &str, t: usize, detail: String| {
            violations.push(Violation {
                kind,
                node: node.to_string(),
                commodity: reg.name(commodity).to_string(),
                timestep: t,
                detail,
            })
        };

        for c in reg.ids() {
            let x = outflow[c.0];
            if !arc.permits(c, inst.departure) && x != 0.0 {
                flag(
                    ViolationKind::WindowClosedFlow,
                    c,
                    &arc.from,
                    inst.departure,
                    format!("{x} on closed arc {}", arc.label),
                );
            }
            if x < -1e-9 {
                flag(ViolationKind::NegativeFlow, c, &arc.from, inst.departure, format!("{x} on {}", arc.label));
            }
        }

        let inflow = match arc.kind {
            ArcKind::Transformation => production_inflow(outflow, graph, ctx),
            ArcKind::Transport | ArcKind::Holdover => outflow.to_vec(),
        };

        if arc.kind == ArcKind::Transformation {
            for c in reg.ids() {
                let scale = 1.0 + outflow[c.0].abs();
                if inflow[c.0] < -STOCK_TOL * scale {
                    let kind = if reg.name(c) == "power" {
                        ViolationKind::PowerDeficit
                    } else {
                        ViolationKind::NegativeInflow
                    };
                    flag(kind, c, &arc.from, inst.departure, format!("{} net after {}", inflow[c.0], arc.label));
                }
            }
            // generation versus draw, from the rate tables alone
            let (mut generated, mut drawn) = (0.0, 0.0);
            for component in Component::ALL {
                if let (Some(plant), Some(table)) = (reg.lookup(component.name()), ctx.rates.get(&component)) {
                    let p = table.power_kw_per_kg * outflow[plant.0];
                    if p >= 0.0 {
                        generated += p;
                    } else {
                        drawn -= p;
                    }
                }
            }
            if let Some(power) = reg.lookup("power") {
                generated += outflow[power.0];
                if drawn > generated + STOCK_TOL * (1.0 + generated) {
                    flag(
                        ViolationKind::PowerDeficit,
                        power,
                        &arc.from,
                        inst.departure,
                        format!("draw {drawn} kW exceeds supply {generated} kW"),
                    );
                }
            }
        }

        if let Some(dv) = ctx.delta_v.get(&arc.from, &arc.to) {
            let payload: f64 = reg
                .iter()
                .filter(|(_, c)| c.unit == Unit::Kg)
                .map(|(id, _)| outflow[id.0].max(0.0))
                .sum();
            let vehicles = spacecraft.map(|s| outflow[s.0]).unwrap_or(0.0);
            if payload > 0.0 || vehicles > 0.0 {
                let final_mass = payload + ctx.propulsion.structure_mass * vehicles;
                let propellant = propellant_for_leg(dv, final_mass, &ctx.propulsion).unwrap_or(f64::INFINITY);
                let capacity = ctx.propulsion.propellant_capacity * vehicles;
                if propellant > capacity + STOCK_TOL * (1.0 + capacity) {
                    flag(
                        ViolationKind::PropellantCapacity,
                        spacecraft.unwrap_or(CommodityId(0)),
                        &arc.from,
                        inst.departure,
                        format!("{propellant} kg propellant needed, {capacity} kg available on {}", arc.label),
                    );
                }
            }
        }

        for row in &arc.concurrency {
            let lhs = row.evaluate(outflow);
            let scale = 1.0 + row.bound.abs() + row.coefficients.iter().map(|(c, w)| (w * outflow[c.0]).abs()).sum::<f64>();
            if lhs > row.bound + BALANCE_TOL * scale {
                let c = row.coefficients.first().map(|(c, _)| *c).unwrap_or(CommodityId(0));
                flag(
                    ViolationKind::ConcurrencyBound,
                    c,
                    &arc.from,
                    inst.departure,
                    format!("`{}`: {lhs} > {}", row.description, row.bound),
                );
            }
        }

        for c in reg.ids() {
            ledger.add(to, inst.arrival, c, inflow[c.0]);
            departures.add(from, inst.departure, c, outflow[c.0]);
        }
    }

    let last = graph.final_timestep();
    for (ni, node) in graph.nodes.iter().enumerate() {
        for t in 0..graph.horizon {
            for c in reg.ids() {
                let demand = node.demand_at(c, t);
                let arrived = ledger.get(ni, t, c);
                ledger.add(ni, t, c, -demand);
                if node.unlimited_supply {
                    continue;
                }
                let on_hand = arrived - demand;
                let left = departures.get(ni, t, c);
                let scale = 1.0 + arrived.abs() + left.abs() + demand.abs();
                let mut flag = |kind, detail: String| {
                    violations.push(Violation {
                        kind,
                        node: node.id.clone(),
                        commodity: reg.name(c).to_string(),
                        timestep: t,
                        detail,
                    })
                };
                if on_hand < -STOCK_TOL * scale {
                    let kind = if demand > 0.0 {
                        ViolationKind::DemandUnmet
                    } else {
                        ViolationKind::NegativeStock
                    };
                    flag(kind, format!("arrived {arrived}, demand {demand}"));
                    continue;
                }
                let residual = on_hand - left;
                let may_keep = t == last && node.can_store(c);
                if residual.abs() > BALANCE_TOL * scale && !(may_keep && residual > 0.0) {
                    flag(
                        ViolationKind::Imbalance,
                        format!("on hand {on_hand}, departing {left}, residual {residual}"),
                    );
                }
            }
        }
    }

    let verdict = Verdict {
        passed: violations.is_empty(),
        violations: violations.len(),
        first_violation: violations.into_iter().next(),
    };
    ReplayOutcome { ledger, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{expand, ids, register_baseline_commodities, ArcSpec, Node, NodeKind};
    use crate::transform::baseline_rates;

    fn ctx<'a>(rates: &'a RateTable, dv: &'a DeltaVTable) -> ReplayContext<'a> {
        ReplayContext {
            rates,
            maintenance_rate: 0.0,
            step_years: 1.0,
            propulsion: PropulsionSpec::baseline(),
            delta_v: dv,
        }
    }

    #[test]
    fn empty_plan_with_no_demand_passes() {
        let nodes = vec![Node::new("A", NodeKind::LunarSurface), Node::new("B", NodeKind::Habitat)];
        let g = expand(register_baseline_commodities(), nodes, vec![ArcSpec::transport("A", "B", 0)], 3).unwrap();
        let flows = vec![0.0; g.instances.len() * g.registry.len()];
        let (rates, dv) = (baseline_rates(), DeltaVTable::default());
        let out = replay(&flows, &g, &ctx(&rates, &dv));
        assert!(out.verdict.passed, "{:?}", out.verdict);
    }

    #[test]
    fn unmet_demand_is_localised() {
        let mut nodes = vec![Node::new("A", NodeKind::LunarSurface), Node::new("B", NodeKind::Habitat)];
        nodes[1].add_demand(ids::O2, 1, 5.0);
        let g = expand(register_baseline_commodities(), nodes, vec![], 2).unwrap();
        let flows = vec![0.0; g.instances.len() * g.registry.len()];
        let (rates, dv) = (baseline_rates(), DeltaVTable::default());
        let out = replay(&flows, &g, &ctx(&rates, &dv));
        let v = out.verdict.first_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::DemandUnmet);
        assert_eq!((v.node.as_str(), v.commodity.as_str(), v.timestep), ("B", "O2", 1));
    }

    #[test]
    fn production_recomputed_from_rates() {
        let reg = register_baseline_commodities();
        let nodes = vec![Node::new("LS", NodeKind::LunarSurface)];
        let g = expand(reg, nodes, vec![], 2).unwrap();
        let mut out = vec![0.0; 15];
        out[ids::MRE.0] = 10.0;
        out[ids::DSOIL.0] = 378.9;
        let (rates, dv) = (baseline_rates(), DeltaVTable::default());
        let inflow = production_inflow(&out, &g, &ctx(&rates, &dv));
        assert!((inflow[ids::O2.0] - 166.7).abs() < 1e-9);
        assert!(inflow[ids::DSOIL.0].abs() < 1e-9);
        assert!((inflow[ids::POWER.0] + 0.942).abs() < 1e-12);
    }
}
