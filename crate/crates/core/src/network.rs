//! Commodities, the static node/arc network and its time-expanded form.
//!
//! A static network is a list of [`Node`]s and [`ArcSpec`]s. [`expand`]
//! instantiates every arc at each departure timestep whose arrival still lies
//! inside the horizon, and adds one holdover arc per node and non-final
//! timestep so stocks can persist. The resulting [`TimeExpandedGraph`] is
//! immutable and can be shared freely between solver workers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a commodity inside a [`CommodityRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CommodityId(pub usize);

impl CommodityId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Positions of the baseline commodities, in flow-vector order.
pub mod ids {
    use super::CommodityId;

    pub const SOIL: CommodityId = CommodityId(0);
    pub const SLAG: CommodityId = CommodityId(1);
    pub const DSOIL: CommodityId = CommodityId(2);
    pub const SPARES: CommodityId = CommodityId(3);
    pub const O2: CommodityId = CommodityId(4);
    pub const H2: CommodityId = CommodityId(5);
    pub const H2O: CommodityId = CommodityId(6);
    pub const EMISSIONS: CommodityId = CommodityId(7);
    pub const METALS: CommodityId = CommodityId(8);
    pub const EXCAVATOR: CommodityId = CommodityId(9);
    pub const SWE: CommodityId = CommodityId(10);
    pub const DWE: CommodityId = CommodityId(11);
    pub const MRE: CommodityId = CommodityId(12);
    pub const POWER: CommodityId = CommodityId(13);
    pub const FSPS: CommodityId = CommodityId(14);
    /// Integer vehicle count, appended by [`super::CommodityRegistry::with_spacecraft`].
    pub const SPACECRAFT: CommodityId = CommodityId(15);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommodityKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "kg")]
    Kg,
    #[serde(rename = "kW")]
    Kw,
    #[serde(rename = "count")]
    Count,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Kg => "kg",
            Unit::Kw => "kW",
            Unit::Count => "count",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub name: String,
    pub kind: CommodityKind,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommodityRegistry {
    commodities: Vec<Commodity>,
}

const BASELINE_NAMES: [&str; 15] = [
    "soil", "slag", "dsoil", "spares", "O2", "H2", "H2O", "emissions", "metals", "excavator",
    "SWE", "DWE", "MRE", "power", "FSPS",
];

/// The 15 tracked flows of the lunar surface model. All are continuous; plant
/// commodities are sized in kg of deployed hardware.
pub fn register_baseline_commodities() -> CommodityRegistry {
    let commodities = BASELINE_NAMES
        .iter()
        .map(|&name| Commodity {
            name: name.to_string(),
            kind: CommodityKind::Continuous,
            unit: if name == "power" { Unit::Kw } else { Unit::Kg },
        })
        .collect();
    CommodityRegistry { commodities }
}

impl CommodityRegistry {
    /// Baseline registry plus an integer `spacecraft` commodity.
    pub fn with_spacecraft() -> Self {
        let mut registry = register_baseline_commodities();
        registry.commodities.push(Commodity {
            name: "spacecraft".to_string(),
            kind: CommodityKind::Discrete,
            unit: Unit::Count,
        });
        registry
    }

    pub fn from_commodities(commodities: Vec<Commodity>) -> Self {
        CommodityRegistry { commodities }
    }

    pub fn len(&self) -> usize {
        self.commodities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commodities.is_empty()
    }

    pub fn get(&self, id: CommodityId) -> Option<&Commodity> {
        self.commodities.get(id.0)
    }

    pub fn contains(&self, id: CommodityId) -> bool {
        id.0 < self.commodities.len()
    }

    pub fn lookup(&self, name: &str) -> Option<CommodityId> {
        self.commodities.iter().position(|c| c.name == name).map(CommodityId)
    }

    pub fn name(&self, id: CommodityId) -> &str {
        self.commodities
            .get(id.0)
            .map(|c| c.name.as_str())
            .unwrap_or("<unknown>")
    }

    pub fn iter(&self) -> impl Iterator<Item = (CommodityId, &Commodity)> {
        self.commodities.iter().enumerate().map(|(i, c)| (CommodityId(i), c))
    }

    pub fn ids(&self) -> impl Iterator<Item = CommodityId> {
        (0..self.commodities.len()).map(CommodityId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Earth,
    Leo,
    LunarSurface,
    Habitat,
    /// Virtual node absorbing byproducts.
    Disposal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// (commodity, timestep) -> mass. Positive values must be consumed at the
    /// node, negative values are supplied by it.
    pub demand: BTreeMap<(CommodityId, usize), f64>,
    /// Commodities that cannot be stored here: holdover arcs never carry them
    /// and nothing of them may remain at the end of the horizon.
    pub non_storable: BTreeSet<CommodityId>,
    /// Unlimited source (Earth). Such nodes get no mass-balance rows.
    pub unlimited_supply: bool,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Node {
            id: id.into(),
            kind,
            demand: BTreeMap::new(),
            non_storable: BTreeSet::new(),
            unlimited_supply: kind == NodeKind::Earth,
        }
    }

    pub fn add_demand(&mut self, commodity: CommodityId, timestep: usize, amount: f64) {
        *self.demand.entry((commodity, timestep)).or_insert(0.0) += amount;
    }

    pub fn demand_at(&self, commodity: CommodityId, timestep: usize) -> f64 {
        self.demand.get(&(commodity, timestep)).copied().unwrap_or(0.0)
    }

    pub fn can_store(&self, commodity: CommodityId) -> bool {
        !self.non_storable.contains(&commodity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    Transport,
    Transformation,
    Holdover,
}

/// Bucket a cost term is reported under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostClass {
    Launch,
    Propellant,
    Hardware,
    Operations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostTerm {
    pub commodity: CommodityId,
    pub class: CostClass,
    /// Currency per unit of flow.
    pub coefficient: f64,
}

/// Dense square matrix mapping an arc's outflow vector to its inflow vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformationMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TransformationMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        TransformationMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at (inflow row, outflow column).
    pub fn get(&self, row: CommodityId, col: CommodityId) -> f64 {
        self.entries[row.0 * self.dim + col.0]
    }

    pub fn set(&mut self, row: CommodityId, col: CommodityId, value: f64) {
        self.entries[row.0 * self.dim + col.0] = value;
    }

    pub fn add(&mut self, row: CommodityId, col: CommodityId, value: f64) {
        self.entries[row.0 * self.dim + col.0] += value;
    }

    pub fn row(&self, row: CommodityId) -> &[f64] {
        &self.entries[row.0 * self.dim..(row.0 + 1) * self.dim]
    }

    pub fn apply(&self, outflow: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| {
                self.entries[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(outflow)
                    .map(|(q, x)| q * x)
                    .sum()
            })
            .collect()
    }

    /// Copy into a larger matrix whose extra commodities pass through unchanged.
    pub fn embed(&self, dim: usize) -> Self {
        let mut out = TransformationMatrix::identity(dim);
        for r in 0..self.dim.min(dim) {
            for c in 0..self.dim.min(dim) {
                out.entries[r * dim + c] = self.entries[r * self.dim + c];
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// One `-(Qx)_k <= 0` row for each inflow commodity that some column can
    /// consume, so that no transformation yields a negative inflow.
    pub fn nonnegativity_rows(&self, registry: &CommodityRegistry) -> Vec<ConcurrencyRow> {
        (0..self.dim)
            .filter(|&r| self.row(CommodityId(r)).iter().any(|&q| q < 0.0))
            .map(|r| ConcurrencyRow {
                coefficients: self
                    .row(CommodityId(r))
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| **q != 0.0)
                    .map(|(c, q)| (CommodityId(c), -q))
                    .collect(),
                bound: 0.0,
                description: format!("nonnegative {} inflow", registry.name(CommodityId(r))),
            })
            .collect()
    }
}

/// Linear side constraint `sum(coefficients * x) <= bound` on one arc instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrencyRow {
    pub coefficients: Vec<(CommodityId, f64)>,
    pub bound: f64,
    pub description: String,
}

impl ConcurrencyRow {
    pub fn evaluate(&self, flow: &[f64]) -> f64 {
        self.coefficients.iter().map(|(c, w)| w * flow[c.0]).sum()
    }
}

/// Departure timesteps at which `commodities` may flow on an arc. Outside
/// `open` those flows are fixed to zero; an empty `open` closes them for good.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindow {
    pub commodities: BTreeSet<CommodityId>,
    pub open: BTreeSet<usize>,
}

impl TimeWindow {
    pub fn closed(commodities: impl IntoIterator<Item = CommodityId>) -> Self {
        TimeWindow {
            commodities: commodities.into_iter().collect(),
            open: BTreeSet::new(),
        }
    }

    pub fn permits(&self, commodity: CommodityId, timestep: usize) -> bool {
        !self.commodities.contains(&commodity) || self.open.contains(&timestep)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcSpec {
    pub label: String,
    pub from: String,
    pub to: String,
    pub kind: ArcKind,
    pub time_of_flight: usize,
    pub costs: Vec<CostTerm>,
    /// `None` is the identity.
    pub transformation: Option<TransformationMatrix>,
    pub concurrency: Vec<ConcurrencyRow>,
    pub windows: Vec<TimeWindow>,
}

impl ArcSpec {
    pub fn transport(from: impl Into<String>, to: impl Into<String>, time_of_flight: usize) -> Self {
        let from = from.into();
        let to = to.into();
        ArcSpec {
            label: format!("{from}->{to}"),
            from,
            to,
            kind: ArcKind::Transport,
            time_of_flight,
            costs: Vec::new(),
            transformation: None,
            concurrency: Vec::new(),
            windows: Vec::new(),
        }
    }

    pub fn holdover(node: impl Into<String>) -> Self {
        let node = node.into();
        ArcSpec {
            label: format!("hold:{node}"),
            from: node.clone(),
            to: node,
            kind: ArcKind::Holdover,
            time_of_flight: 1,
            costs: Vec::new(),
            transformation: None,
            concurrency: Vec::new(),
            windows: Vec::new(),
        }
    }

    pub fn with_cost(mut self, commodity: CommodityId, class: CostClass, coefficient: f64) -> Self {
        self.costs.push(CostTerm { commodity, class, coefficient });
        self
    }

    /// Total cost coefficient of one unit of `commodity` on this arc.
    pub fn cost_of(&self, commodity: CommodityId) -> f64 {
        self.costs
            .iter()
            .filter(|t| t.commodity == commodity)
            .map(|t| t.coefficient)
            .sum()
    }

    pub fn permits(&self, commodity: CommodityId, departure: usize) -> bool {
        self.windows.iter().all(|w| w.permits(commodity, departure))
    }

    pub fn q_entry(&self, row: CommodityId, col: CommodityId) -> f64 {
        match &self.transformation {
            Some(q) => q.get(row, col),
            None => {
                if row == col {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One static arc departing at a specific timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcInstance {
    pub spec: usize,
    pub departure: usize,
    pub arrival: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("horizon must contain at least one timestep")]
    EmptyHorizon,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("arc `{arc}` references unknown node `{node}`")]
    UnknownNode { arc: String, node: String },
    #[error("arc `{arc}` has time of flight {time_of_flight} but the horizon only spans {horizon} timesteps, so it can never be flown")]
    TimeOfFlightExceedsHorizon { arc: String, time_of_flight: usize, horizon: usize },
}

#[derive(Debug, Clone)]
pub struct TimeExpandedGraph {
    pub registry: CommodityRegistry,
    pub nodes: Vec<Node>,
    /// Number of timesteps; the horizon is `0..horizon`.
    pub horizon: usize,
    /// Static arcs: the input arcs followed by one holdover per node.
    pub arcs: Vec<ArcSpec>,
    pub instances: Vec<ArcInstance>,
}

impl TimeExpandedGraph {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn final_timestep(&self) -> usize {
        self.horizon - 1
    }

    pub fn spec_of(&self, instance: usize) -> &ArcSpec {
        &self.arcs[self.instances[instance].spec]
    }

    pub fn commodity_count(&self) -> usize {
        self.registry.len()
    }
}

/// Build the time-expanded network over timesteps `0..horizon`.
pub fn expand(
    registry: CommodityRegistry,
    nodes: Vec<Node>,
    arcs: Vec<ArcSpec>,
    horizon: usize,
) -> Result<TimeExpandedGraph, NetworkError> {
    if horizon == 0 {
        return Err(NetworkError::EmptyHorizon);
    }
    let mut seen = BTreeSet::new();
    for node in &nodes {
        if !seen.insert(node.id.as_str()) {
            return Err(NetworkError::DuplicateNode(node.id.clone()));
        }
    }
    for arc in &arcs {
        for end in [&arc.from, &arc.to] {
            if !seen.contains(end.as_str()) {
                return Err(NetworkError::UnknownNode {
                    arc: arc.label.clone(),
                    node: end.clone(),
                });
            }
        }
        if arc.time_of_flight >= horizon {
            return Err(NetworkError::TimeOfFlightExceedsHorizon {
                arc: arc.label.clone(),
                time_of_flight: arc.time_of_flight,
                horizon,
            });
        }
    }

    let mut all_arcs = arcs;
    for node in &nodes {
        let mut hold = ArcSpec::holdover(node.id.clone());
        if !node.non_storable.is_empty() {
            hold.windows.push(TimeWindow::closed(node.non_storable.iter().copied()));
        }
        all_arcs.push(hold);
    }

    let mut instances = Vec::new();
    for (spec, arc) in all_arcs.iter().enumerate() {
        for departure in 0..horizon {
            let arrival = departure + arc.time_of_flight;
            if arrival < horizon {
                instances.push(ArcInstance { spec, departure, arrival });
            }
        }
    }

    Ok(TimeExpandedGraph {
        registry,
        nodes,
        horizon,
        arcs: all_arcs,
        instances,
    })
}

/// One violated invariant, with coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Check every graph invariant; returns one diagnostic per violation.
pub fn validate_graph(graph: &TimeExpandedGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |location: String, message: String| out.push(Diagnostic { location, message });
    let registry = &graph.registry;
    let n = registry.len();

    let mut ids = BTreeSet::new();
    for node in &graph.nodes {
        if !ids.insert(node.id.as_str()) {
            push(format!("node {}", node.id), "duplicate node id".into());
        }
        for &(commodity, t) in node.demand.keys() {
            if !registry.contains(commodity) {
                push(
                    format!("node {} t={t}", node.id),
                    format!("demand references unknown commodity index {}", commodity.0),
                );
            }
            if t >= graph.horizon {
                push(
                    format!("node {} t={t}", node.id),
                    format!(
                        "demand for {} lies outside the horizon 0..{}",
                        registry.name(commodity),
                        graph.horizon
                    ),
                );
            }
        }
        for commodity in &node.non_storable {
            if !registry.contains(*commodity) {
                push(
                    format!("node {}", node.id),
                    format!("non-storable set references unknown commodity index {}", commodity.0),
                );
            }
        }
    }

    for arc in &graph.arcs {
        let loc = format!("arc {}", arc.label);
        for end in [&arc.from, &arc.to] {
            if !ids.contains(end.as_str()) {
                push(loc.clone(), format!("unknown node `{end}`"));
            }
        }
        if arc.kind == ArcKind::Holdover && (arc.from != arc.to || arc.time_of_flight != 1) {
            push(loc.clone(), "holdover arcs must be self-loops with time of flight 1".into());
        }
        for term in &arc.costs {
            if !registry.contains(term.commodity) {
                push(
                    loc.clone(),
                    format!("cost vector references unknown commodity index {}", term.commodity.0),
                );
            } else if !(term.coefficient >= 0.0 && term.coefficient.is_finite()) {
                push(
                    loc.clone(),
                    format!(
                        "cost of {} must be finite and nonnegative, got {}",
                        registry.name(term.commodity),
                        term.coefficient
                    ),
                );
            }
        }
        if let Some(q) = &arc.transformation {
            if q.dim() != n {
                push(
                    loc.clone(),
                    format!("transformation matrix is {0}x{0} but the registry has {n} commodities", q.dim()),
                );
            } else if !q.is_finite() {
                push(loc.clone(), "transformation matrix has non-finite entries".into());
            }
        }
        for row in &arc.concurrency {
            for (c, w) in &row.coefficients {
                if !registry.contains(*c) {
                    push(
                        loc.clone(),
                        format!("concurrency row `{}` references unknown commodity index {}", row.description, c.0),
                    );
                } else if !w.is_finite() {
                    push(loc.clone(), format!("concurrency row `{}` has a non-finite weight", row.description));
                }
            }
            if !row.bound.is_finite() {
                push(loc.clone(), format!("concurrency row `{}` has a non-finite bound", row.description));
            }
        }
        for window in &arc.windows {
            for c in &window.commodities {
                if !registry.contains(*c) {
                    push(loc.clone(), format!("time window references unknown commodity index {}", c.0));
                }
            }
            for t in &window.open {
                if *t >= graph.horizon {
                    push(loc.clone(), format!("time window opens at t={t}, outside the horizon"));
                }
            }
        }
    }

    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        if inst.arrival != inst.departure + arc.time_of_flight || inst.arrival >= graph.horizon {
            push(
                format!("arc {} t={}", arc.label, inst.departure),
                format!("instance {i} arrives at t={} outside the horizon", inst.arrival),
            );
        }
    }

    // exactly one holdover per node and non-final timestep
    let mut holdovers: BTreeMap<(&str, usize), usize> = BTreeMap::new();
    for inst in &graph.instances {
        let arc = &graph.arcs[inst.spec];
        if arc.kind == ArcKind::Holdover {
            *holdovers.entry((arc.from.as_str(), inst.departure)).or_default() += 1;
        }
    }
    for node in &graph.nodes {
        for t in 0..graph.horizon.saturating_sub(1) {
            let count = holdovers.get(&(node.id.as_str(), t)).copied().unwrap_or(0);
            if count != 1 {
                push(
                    format!("node {} t={t}", node.id),
                    format!("expected exactly one holdover arc, found {count}"),
                );
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_nodes() -> Vec<Node> {
        vec![Node::new("A", NodeKind::LunarSurface), Node::new("B", NodeKind::Habitat)]
    }

    #[test]
    fn baseline_registry() {
        let reg = register_baseline_commodities();
        assert_eq!(reg.len(), 15);
        let names: BTreeSet<_> = reg.iter().map(|(_, c)| c.name.clone()).collect();
        assert_eq!(names.len(), 15);
        assert_eq!(reg.get(ids::POWER).unwrap().unit, Unit::Kw);
        for (id, c) in reg.iter() {
            if id != ids::POWER {
                assert_eq!(c.unit, Unit::Kg, "{}", c.name);
            }
        }
        let o2 = reg.lookup("O2").unwrap();
        assert_eq!(o2, ids::O2);
        assert_eq!(reg.get(o2).unwrap().kind, CommodityKind::Continuous);
        assert_eq!(reg.get(reg.lookup("FSPS").unwrap()).unwrap().unit, Unit::Kg);
        assert_eq!(reg.lookup("MRE"), Some(ids::MRE));
    }

    #[test]
    fn spacecraft_extension_is_discrete() {
        let reg = CommodityRegistry::with_spacecraft();
        assert_eq!(reg.len(), 16);
        assert_eq!(reg.lookup("spacecraft"), Some(ids::SPACECRAFT));
        assert_eq!(reg.get(ids::SPACECRAFT).unwrap().kind, CommodityKind::Discrete);
    }

    #[test]
    fn single_timestep_has_no_holdovers() {
        let nodes = ["Earth", "LEO", "LS", "HB"]
            .iter()
            .map(|id| Node::new(*id, NodeKind::Leo))
            .collect();
        let g = expand(register_baseline_commodities(), nodes, vec![], 1).unwrap();
        assert!(g.instances.is_empty());
    }

    #[test]
    fn two_node_one_arc_enumeration() {
        let arcs = vec![ArcSpec::transport("A", "B", 1)];
        let g = expand(register_baseline_commodities(), two_nodes(), arcs, 2).unwrap();
        let transport: Vec<_> = g
            .instances
            .iter()
            .filter(|i| g.arcs[i.spec].kind == ArcKind::Transport)
            .collect();
        assert_eq!(transport.len(), 1);
        assert_eq!(transport[0].departure, 0);
        assert_eq!(transport[0].arrival, 1);
        let holds = g
            .instances
            .iter()
            .filter(|i| g.arcs[i.spec].kind == ArcKind::Holdover)
            .count();
        assert_eq!(holds, 2);
        assert!(validate_graph(&g).is_empty());
    }

    #[test]
    fn unknown_node_rejected() {
        let arcs = vec![ArcSpec::transport("A", "Z", 0)];
        let err = expand(register_baseline_commodities(), two_nodes(), arcs, 2).unwrap_err();
        assert!(matches!(err, NetworkError::UnknownNode { .. }));
    }

    #[test]
    fn unflyable_arc_is_reported_not_dropped() {
        let arcs = vec![ArcSpec::transport("A", "B", 3)];
        let err = expand(register_baseline_commodities(), two_nodes(), arcs, 3).unwrap_err();
        assert_eq!(
            err,
            NetworkError::TimeOfFlightExceedsHorizon {
                arc: "A->B".into(),
                time_of_flight: 3,
                horizon: 3
            }
        );
    }

    #[test]
    fn unknown_cost_commodity_is_one_diagnostic() {
        let arcs = vec![ArcSpec::transport("A", "B", 0).with_cost(CommodityId(40), CostClass::Launch, 1.0)];
        let g = expand(register_baseline_commodities(), two_nodes(), arcs, 2).unwrap();
        let diags = validate_graph(&g);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].message.contains("cost vector"));
    }

    #[test]
    fn demand_outside_horizon_is_one_diagnostic() {
        let mut nodes = two_nodes();
        nodes[1].add_demand(ids::O2, 9, 10.0);
        let g = expand(register_baseline_commodities(), nodes, vec![], 2).unwrap();
        let diags = validate_graph(&g);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].location.contains("t=9"));
    }

    #[test]
    fn non_storable_commodities_close_holdovers() {
        let mut nodes = two_nodes();
        nodes[0].non_storable.insert(ids::SLAG);
        let g = expand(register_baseline_commodities(), nodes, vec![], 3).unwrap();
        let hold = g.arcs.iter().find(|a| a.label == "hold:A").unwrap();
        assert!(!hold.permits(ids::SLAG, 0));
        assert!(hold.permits(ids::O2, 0));
    }

    #[test]
    fn nonnegativity_rows_cover_consumed_commodities() {
        let reg = register_baseline_commodities();
        let mut q = TransformationMatrix::identity(15);
        q.set(ids::DSOIL, ids::MRE, -37.89);
        let rows = q.nonnegativity_rows(&reg);
        assert_eq!(rows.len(), 1);
        let mut x = vec![0.0; 15];
        x[ids::MRE.0] = 1.0;
        x[ids::DSOIL.0] = 30.0;
        // inflow of dsoil would be 30 - 37.89 < 0, so the row is violated
        assert!(rows[0].evaluate(&x) > rows[0].bound);
    }
}
