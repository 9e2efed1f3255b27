use std::collections::BTreeMap;

use thiserror::Error;

use crate::network::{CommodityId, CommodityKind, TimeExpandedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
}

/// The (arc instance, commodity) pair a flow variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowKey {
    pub instance: usize,
    pub commodity: CommodityId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub origin: Option<FlowKey>,
    /// Fixed to zero by a closed time window.
    pub window_closed: bool,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lower,
            upper,
            cost,
            origin: None,
            window_closed: false,
        }
    }

    pub fn integer(name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Self {
        Variable {
            kind: VarKind::Integer,
            ..Variable::continuous(name, lower, upper, cost)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrigin {
    Balance {
        node: usize,
        timestep: usize,
        commodity: CommodityId,
    },
    Concurrency {
        instance: usize,
        row: usize,
    },
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coefficients: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub origin: RowOrigin,
}

impl Constraint {
    pub fn new(name: impl Into<String>, coefficients: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Constraint {
            name: name.into(),
            coefficients,
            sense,
            rhs,
            origin: RowOrigin::Other,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().map(|(j, a)| a * x[*j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimise `sum(cost * x)` subject to linear rows and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProblem {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Commodities per arc instance when compiled from a graph; variable
    /// `instance * stride + commodity` carries that flow.
    pub stride: usize,
}

impl MilpProblem {
    pub fn new() -> Self {
        MilpProblem::default()
    }

    pub fn add_variable(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, row: Constraint) -> usize {
        self.constraints.push(row);
        self.constraints.len() - 1
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.kind == VarKind::Integer)
    }

    pub fn flow_index(&self, instance: usize, commodity: CommodityId) -> usize {
        instance * self.stride + commodity.0
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, x)| v.cost * x).sum()
    }

    pub fn rhs_norm(&self) -> f64 {
        self.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max)
    }

    /// Largest row violation of `x`.
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max)
    }

    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .map(|(v, x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Lagrangian dual value `y'b + sum_j min_{l<=x<=u} (c_j - y'A_j) x_j`, a
    /// lower bound on the optimum for any sign-feasible `duals`. Multipliers
    /// of the wrong sign are projected to zero first; reduced costs within
    /// `tol` of zero are treated as zero.
    pub fn lagrangian_bound(&self, duals: &[f64], tol: f64) -> f64 {
        let y: Vec<f64> = self
            .constraints
            .iter()
            .zip(duals)
            .map(|(row, &y)| match row.sense {
                Sense::Le => y.min(0.0),
                Sense::Ge => y.max(0.0),
                Sense::Eq => y,
            })
            .collect();
        let mut reduced: Vec<f64> = self.variables.iter().map(|v| v.cost).collect();
        for (row, yi) in self.constraints.iter().zip(&y) {
            for (j, a) in &row.coefficients {
                reduced[*j] -= yi * a;
            }
        }
        let mut bound: f64 = self.constraints.iter().zip(&y).map(|(r, yi)| yi * r.rhs).sum();
        for (v, d) in self.variables.iter().zip(reduced) {
            let d = if d.abs() <= tol { 0.0 } else { d };
            if d > 0.0 {
                bound += d * v.lower;
            } else if d < 0.0 {
                bound += d * v.upper;
            }
        }
        bound
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("node `{node}` has demand for commodity index {commodity} at t={timestep}, which is not in the graph")]
    UnknownDemand {
        node: String,
        commodity: usize,
        timestep: usize,
    },
    #[error("arc `{arc}` transformation matrix is {got}x{got}, expected {expected}x{expected}")]
    DimensionMismatch { arc: String, got: usize, expected: usize },
    #[error("arc `{arc}` references unknown commodity index {commodity}")]
    UnknownCommodity { arc: String, commodity: usize },
}

/// Build the flow MILP of a time-expanded graph.
///
/// * one variable per (arc instance, commodity), integer for discrete
///   commodities, fixed to zero outside the arc's time windows;
/// * objective `sum c_ij' x_ijt`;
/// * one balance row per (node, timestep, commodity) for every node that is
///   not an unlimited source: transformed arrivals minus departures equal the
///   demand. At the final timestep storable commodities may be left over, so
///   those rows become `>=`;
/// * every concurrency row of every arc instance as `H x <= bound`.
pub fn compile(graph: &TimeExpandedGraph) -> Result<MilpProblem, CompileError> {
    let n = graph.registry.len();
    for arc in &graph.arcs {
        if let Some(q) = &arc.transformation {
            if q.dim() != n {
                return Err(CompileError::DimensionMismatch {
                    arc: arc.label.clone(),
                    got: q.dim(),
                    expected: n,
                });
            }
        }
        let referenced = arc
            .costs
            .iter()
            .map(|t| t.commodity)
            .chain(arc.concurrency.iter().flat_map(|r| r.coefficients.iter().map(|(c, _)| *c)));
        for c in referenced {
            if !graph.registry.contains(c) {
                return Err(CompileError::UnknownCommodity {
                    arc: arc.label.clone(),
                    commodity: c.0,
                });
            }
        }
    }
    for node in &graph.nodes {
        for &(c, t) in node.demand.keys() {
            if !graph.registry.contains(c) || t >= graph.horizon {
                return Err(CompileError::UnknownDemand {
                    node: node.id.clone(),
                    commodity: c.0,
                    timestep: t,
                });
            }
        }
    }

    let mut problem = MilpProblem {
        stride: n,
        ..MilpProblem::default()
    };

    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        for (c, commodity) in graph.registry.iter() {
            let open = arc.permits(c, inst.departure);
            problem.add_variable(Variable {
                name: format!("x[{}@{}][{}]", arc.label, inst.departure, commodity.name),
                kind: match commodity.kind {
                    CommodityKind::Continuous => VarKind::Continuous,
                    CommodityKind::Discrete => VarKind::Integer,
                },
                lower: 0.0,
                upper: if open { f64::INFINITY } else { 0.0 },
                cost: arc.cost_of(c),
                origin: Some(FlowKey { instance: i, commodity: c }),
                window_closed: !open,
            });
        }
    }

    let node_of: BTreeMap<&str, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut arrivals = vec![vec![Vec::new(); graph.horizon]; graph.nodes.len()];
    let mut departures = vec![vec![Vec::new(); graph.horizon]; graph.nodes.len()];
    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        departures[node_of[arc.from.as_str()]][inst.departure].push(i);
        arrivals[node_of[arc.to.as_str()]][inst.arrival].push(i);
    }

    let last = graph.final_timestep();
    for (ni, node) in graph.nodes.iter().enumerate() {
        if node.unlimited_supply {
            continue;
        }
        for t in 0..graph.horizon {
            for k in graph.registry.ids() {
                let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
                for &i in &arrivals[ni][t] {
                    let arc = graph.spec_of(i);
                    for c in graph.registry.ids() {
                        let q = arc.q_entry(k, c);
                        if q != 0.0 {
                            *coeffs.entry(problem.flow_index(i, c)).or_insert(0.0) += q;
                        }
                    }
                }
                for &i in &departures[ni][t] {
                    *coeffs.entry(problem.flow_index(i, k)).or_insert(0.0) -= 1.0;
                }
                let sense = if t == last && node.can_store(k) {
                    Sense::Ge
                } else {
                    Sense::Eq
                };
                problem.add_constraint(Constraint {
                    name: format!("bal[{}@{}][{}]", node.id, t, graph.registry.name(k)),
                    coefficients: coeffs.into_iter().filter(|(_, a)| *a != 0.0).collect(),
                    sense,
                    rhs: node.demand_at(k, t),
                    origin: RowOrigin::Balance {
                        node: ni,
                        timestep: t,
                        commodity: k,
                    },
                });
            }
        }
    }

    for (i, inst) in graph.instances.iter().enumerate() {
        let arc = &graph.arcs[inst.spec];
        for (r, row) in arc.concurrency.iter().enumerate() {
            problem.add_constraint(Constraint {
                name: format!("conc[{}@{}][{}]", arc.label, inst.departure, row.description),
                coefficients: row
                    .coefficients
                    .iter()
                    .map(|(c, w)| (problem.flow_index(i, *c), *w))
                    .collect(),
                sense: Sense::Le,
                rhs: row.bound,
                origin: RowOrigin::Concurrency { instance: i, row: r },
            });
        }
    }

    Ok(problem)
}
