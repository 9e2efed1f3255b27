use std::collections::BTreeSet;

use thiserror::Error;

use super::config::{LegKind, ScenarioConfig};
use crate::network::{
    expand, ids, ArcKind, ArcSpec, CommodityId, CommodityRegistry, ConcurrencyRow, CostClass, NetworkError, Node,
    NodeKind, TimeExpandedGraph, TimeWindow,
};
use crate::transform::{
    add_maintenance, build_isru_q_matrix, propellant_factor, DeltaVTable, PropulsionSpec, RateTable, TransformError,
};

/// Commodities a vehicle may carry from Earth.
pub const CARGO: [CommodityId; 9] = [
    ids::SPARES,
    ids::O2,
    ids::H2,
    ids::H2O,
    ids::EXCAVATOR,
    ids::SWE,
    ids::DWE,
    ids::MRE,
    ids::FSPS,
];

/// Consumables moved over surface legs.
pub const SURFACE_CARGO: [CommodityId; 3] = [ids::O2, ids::H2, ids::H2O];

/// Byproducts that leave the surface site through the disposal arc.
pub const WASTE: [CommodityId; 4] = [ids::SLAG, ids::DSOIL, ids::EMISSIONS, ids::METALS];

/// Products that cannot be stockpiled at the surface site.
const SURFACE_NON_STORABLE: [CommodityId; 5] = [ids::SLAG, ids::DSOIL, ids::EMISSIONS, ids::METALS, ids::POWER];

/// Never carried by the production arc.
const NOT_PROCESSED: [CommodityId; 5] = [ids::SPACECRAFT, ids::POWER, ids::SLAG, ids::METALS, ids::EMISSIONS];

pub const PRODUCTION_LABEL: &str = "isru";

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("network needs exactly one {kind} node, found {found}")]
    NodeCount { kind: &'static str, found: usize },
    #[error("{context} references unknown node `{node}`")]
    UnknownNode { context: String, node: String },
    #[error("{context} references unknown commodity `{commodity}`")]
    UnknownCommodity { context: String, commodity: String },
    #[error("propulsive leg {from}->{to} has no delta-v entry")]
    MissingDeltaV { from: String, to: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// A built scenario: the graph plus the physical tables it was derived from.
#[derive(Debug, Clone)]
pub struct ScenarioModel {
    pub config: ScenarioConfig,
    pub graph: TimeExpandedGraph,
    pub rates: RateTable,
    pub delta_v: DeltaVTable,
    pub propulsion: PropulsionSpec,
    /// Length of one timestep in years.
    pub step_years: f64,
    pub surface: String,
    pub habitat: String,
    pub disposal: String,
}

impl ScenarioModel {
    pub fn isru_enabled(&self) -> bool {
        self.config.isru_enabled
    }
}

fn single(config: &ScenarioConfig, kind: NodeKind, label: &'static str) -> Result<String, BuildError> {
    let found: Vec<_> = config.network.nodes.iter().filter(|n| n.kind == kind).collect();
    match found.as_slice() {
        [one] => Ok(one.id.clone()),
        _ => Err(BuildError::NodeCount { kind: label, found: found.len() }),
    }
}

fn open_only(permitted: &[CommodityId], registry: &CommodityRegistry) -> TimeWindow {
    TimeWindow::closed(registry.ids().filter(|c| !permitted.contains(c)))
}

fn build(config: &ScenarioConfig, isru: bool) -> Result<ScenarioModel, BuildError> {
    let registry = CommodityRegistry::with_spacecraft();
    let horizon = config.horizon_years as usize + 1;
    let step_years = 1.0;
    let surface = single(config, NodeKind::LunarSurface, "lunar_surface")?;
    let habitat = single(config, NodeKind::Habitat, "habitat")?;
    let existing_disposal: Vec<_> = config.network.nodes.iter().filter(|n| n.kind == NodeKind::Disposal).collect();
    let disposal = match existing_disposal.as_slice() {
        [] => format!("{surface}-disposal"),
        [one] => one.id.clone(),
        many => {
            return Err(BuildError::NodeCount {
                kind: "disposal",
                found: many.len(),
            })
        }
    };

    let mut nodes: Vec<Node> = config.network.nodes.iter().map(|n| Node::new(n.id.clone(), n.kind)).collect();
    if existing_disposal.is_empty() {
        nodes.push(Node::new(disposal.clone(), NodeKind::Disposal));
    }
    for node in &mut nodes {
        match node.kind {
            NodeKind::Disposal => {}
            NodeKind::LunarSurface => node.non_storable.extend(SURFACE_NON_STORABLE),
            _ => {
                node.non_storable.insert(ids::POWER);
            }
        }
    }

    let d = &config.demands;
    let hb = nodes.iter().position(|n| n.id == habitat).expect("habitat was found above");
    for t in 1..horizon {
        if d.o2_per_year > 0.0 {
            nodes[hb].add_demand(ids::O2, t, d.o2_per_year * step_years * d.multiplier);
        }
        if d.h2o_per_year > 0.0 {
            nodes[hb].add_demand(ids::H2O, t, d.h2o_per_year * step_years * d.multiplier);
        }
    }
    for (i, e) in d.extra.iter().enumerate() {
        let context = format!("demands.extra[{i}]");
        let c = registry.lookup(&e.commodity).ok_or_else(|| BuildError::UnknownCommodity {
            context: context.clone(),
            commodity: e.commodity.clone(),
        })?;
        let node = nodes.iter_mut().find(|n| n.id == e.node).ok_or(BuildError::UnknownNode {
            context,
            node: e.node.clone(),
        })?;
        // out-of-horizon timesteps are kept and reported by graph validation
        node.add_demand(c, e.timestep, e.amount * d.multiplier);
    }

    let mut delta_v = DeltaVTable::default();
    for e in &config.network.delta_v {
        delta_v.insert(e.from.clone(), e.to.clone(), e.deltav);
    }
    let propulsion: PropulsionSpec = config.propulsion.into();
    let costs = &config.costs;
    let blend = costs.propellant_price();

    let cargo: Vec<CommodityId> = CARGO
        .iter()
        .copied()
        .filter(|c| isru || ![ids::EXCAVATOR, ids::SWE, ids::DWE, ids::MRE, ids::FSPS].contains(c))
        .collect();
    let mut vehicle_cargo = cargo.clone();
    vehicle_cargo.push(ids::SPACECRAFT);

    let mut arcs = Vec::new();
    for leg in &config.network.legs {
        let mut arc = ArcSpec::transport(leg.from.clone(), leg.to.clone(), leg.time_of_flight);
        match leg.kind {
            LegKind::Launch => {
                for &c in &cargo {
                    arc = arc.with_cost(c, CostClass::Launch, costs.launch_per_kg);
                }
                arc = arc
                    .with_cost(ids::SPACECRAFT, CostClass::Hardware, costs.spacecraft_manufacturing)
                    .with_cost(ids::SPACECRAFT, CostClass::Launch, costs.launch_per_kg * propulsion.structure_mass);
                arc.windows.push(open_only(&vehicle_cargo, &registry));
            }
            LegKind::Propulsive => {
                let dv = delta_v.get(&leg.from, &leg.to).ok_or_else(|| BuildError::MissingDeltaV {
                    from: leg.from.clone(),
                    to: leg.to.clone(),
                })?;
                let phi = propellant_factor(dv, &propulsion);
                for &c in &cargo {
                    arc = arc
                        .with_cost(c, CostClass::Launch, phi * costs.launch_per_kg)
                        .with_cost(c, CostClass::Propellant, phi * blend);
                }
                let structure = phi * propulsion.structure_mass;
                arc = arc
                    .with_cost(ids::SPACECRAFT, CostClass::Operations, costs.spacecraft_operation_per_flight)
                    .with_cost(ids::SPACECRAFT, CostClass::Launch, structure * costs.launch_per_kg)
                    .with_cost(ids::SPACECRAFT, CostClass::Propellant, structure * blend);
                let mut coefficients: Vec<(CommodityId, f64)> = cargo.iter().map(|&c| (c, phi)).collect();
                coefficients.push((ids::SPACECRAFT, structure - propulsion.propellant_capacity));
                arc.concurrency.push(ConcurrencyRow {
                    coefficients,
                    bound: 0.0,
                    description: "propellant capacity".into(),
                });
                arc.windows.push(open_only(&vehicle_cargo, &registry));
            }
            LegKind::Surface => {
                arc.windows.push(open_only(&SURFACE_CARGO, &registry));
            }
        }
        arcs.push(arc);
    }

    let rates = config.rates.resolve();
    if isru {
        let mut q = build_isru_q_matrix(&rates, &registry, step_years)?;
        add_maintenance(&mut q, config.maintenance_rate, step_years);
        let processed: Vec<CommodityId> = registry.ids().filter(|c| !NOT_PROCESSED.contains(c)).collect();
        let mut arc = ArcSpec::transport(surface.clone(), surface.clone(), 1);
        arc.label = PRODUCTION_LABEL.into();
        arc.kind = ArcKind::Transformation;
        arc.concurrency = q.nonnegativity_rows(&registry);
        arc.transformation = Some(q);
        arc.windows.push(open_only(&processed, &registry));
        arcs.push(arc);
    }

    let mut dispose = ArcSpec::transport(surface.clone(), disposal.clone(), 0);
    let mut permitted: Vec<CommodityId> = WASTE.to_vec();
    permitted.push(ids::POWER);
    dispose.windows.push(open_only(&permitted, &registry));
    if let Some(open) = &config.disposal.windows {
        dispose.windows.push(TimeWindow {
            commodities: WASTE.iter().copied().collect(),
            open: open.iter().copied().collect::<BTreeSet<_>>(),
        });
    }
    arcs.push(dispose);

    for arc in &arcs {
        for end in [&arc.from, &arc.to] {
            if !nodes.iter().any(|n| &n.id == end) {
                return Err(BuildError::UnknownNode {
                    context: format!("leg {}", arc.label),
                    node: end.clone(),
                });
            }
        }
    }

    let graph = expand(registry, nodes, arcs, horizon)?;
    Ok(ScenarioModel {
        config: config.clone(),
        graph,
        rates,
        delta_v,
        propulsion,
        step_years,
        surface,
        habitat,
        disposal,
    })
}

/// Network with a production arc at the surface site.
pub fn build_isru_scenario(config: &ScenarioConfig) -> Result<ScenarioModel, BuildError> {
    build(config, true)
}

/// Same network without production: every kg is flown from Earth.
pub fn build_earth_dependent_scenario(config: &ScenarioConfig) -> Result<ScenarioModel, BuildError> {
    build(config, false)
}

pub fn build_scenario(config: &ScenarioConfig) -> Result<ScenarioModel, BuildError> {
    build(config, config.isru_enabled)
}
