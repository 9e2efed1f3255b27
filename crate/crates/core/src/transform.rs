//! Component physics: ISRU productivity tables, the transformation matrix they
//! induce on the lunar-surface production arc, and rocket-equation sizing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{ids, CommodityId, CommodityRegistry, TransformationMatrix};

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Per-species split of aggregate MRE metals, kg per year per kg plant.
/// Used for reporting only; the flow network carries aggregate `metals`.
pub const MRE_METAL_SPLIT: [(&str, f64); 4] = [("Si", 7.43), ("Fe", 3.71), ("Al", 2.08), ("Ti", 1.94)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "MRE")]
    Mre,
    #[serde(rename = "SWE")]
    Swe,
    #[serde(rename = "DWE")]
    Dwe,
    #[serde(rename = "excavator")]
    Excavator,
    #[serde(rename = "FSPS")]
    Fsps,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Mre,
        Component::Swe,
        Component::Dwe,
        Component::Excavator,
        Component::Fsps,
    ];

    /// The commodity that measures deployed plant mass.
    pub fn plant_commodity(self) -> CommodityId {
        match self {
            Component::Mre => ids::MRE,
            Component::Swe => ids::SWE,
            Component::Dwe => ids::DWE,
            Component::Excavator => ids::EXCAVATOR,
            Component::Fsps => ids::FSPS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Mre => "MRE",
            Component::Swe => "SWE",
            Component::Dwe => "DWE",
            Component::Excavator => "excavator",
            Component::Fsps => "FSPS",
        }
    }

    pub fn is_generator(self) -> bool {
        self == Component::Fsps
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Productivity of one plant type, per kg of deployed plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRates {
    pub component: Component,
    /// commodity name -> kg produced per year per kg plant
    pub products: BTreeMap<String, f64>,
    /// commodity name -> kg consumed per year per kg plant (stored positive)
    pub consumptions: BTreeMap<String, f64>,
    /// kW per kg plant; negative draws power, positive generates it
    pub power_kw_per_kg: f64,
}

pub type RateTable = BTreeMap<Component, ComponentRates>;

fn rates(
    component: Component,
    products: &[(&str, f64)],
    consumptions: &[(&str, f64)],
    power_kw_per_kg: f64,
) -> ComponentRates {
    let owned = |list: &[(&str, f64)]| list.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    ComponentRates {
        component,
        products: owned(products),
        consumptions: owned(consumptions),
        power_kw_per_kg,
    }
}

/// Productivity table of the five baseline surface components.
pub fn baseline_rates() -> RateTable {
    [
        rates(
            Component::Mre,
            &[("O2", 16.67), ("metals", 15.16), ("slag", 6.06)],
            &[("dsoil", 37.89)],
            -0.0942,
        ),
        rates(
            Component::Swe,
            &[("H2O", 10.50), ("dsoil", 173.48), ("emissions", 3.52)],
            &[("soil", 187.5)],
            -0.0359,
        ),
        rates(Component::Dwe, &[("O2", 31.12), ("H2", 3.88)], &[("H2O", 35.0)], -0.0700),
        rates(Component::Excavator, &[("soil", 333.33)], &[], -0.00113),
        rates(Component::Fsps, &[], &[], 0.00667),
    ]
    .into_iter()
    .map(|r| (r.component, r))
    .collect()
}

impl ComponentRates {
    /// Every rate multiplied by `k`, power included.
    pub fn scaled(&self, k: f64) -> Self {
        let scale = |m: &BTreeMap<String, f64>| m.iter().map(|(c, v)| (c.clone(), v * k)).collect();
        ComponentRates {
            component: self.component,
            products: scale(&self.products),
            consumptions: scale(&self.consumptions),
            power_kw_per_kg: self.power_kw_per_kg * k,
        }
    }

    pub fn product(&self, commodity: &str) -> f64 {
        self.products.get(commodity).copied().unwrap_or(0.0)
    }

    pub fn consumption(&self, commodity: &str) -> f64 {
        self.consumptions.get(commodity).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("no rate table for component {0}")]
    MissingComponent(Component),
    #[error("{component} rate references unregistered commodity `{commodity}`")]
    UnknownCommodity { component: Component, commodity: String },
    #[error("{component} table lists a non-finite or negative rate for `{commodity}`")]
    InvalidRate { component: Component, commodity: String },
    #[error("timestep length must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("{field} must be nonnegative, got {value}")]
    Negative { field: &'static str, value: f64 },
}

/// Production-arc matrix: identity plus `rate * step_years` for every product
/// (positive) and consumption (negative), and the plant power coefficients on
/// the `power` row. Power is a rate in kW and is not scaled by the step.
pub fn build_isru_q_matrix(
    rates: &RateTable,
    registry: &CommodityRegistry,
    step_years: f64,
) -> Result<TransformationMatrix, TransformError> {
    if !(step_years > 0.0 && step_years.is_finite()) {
        return Err(TransformError::NonPositiveStep(step_years));
    }
    let power = registry.lookup("power").ok_or_else(|| TransformError::UnknownCommodity {
        component: Component::Fsps,
        commodity: "power".into(),
    })?;
    let mut q = TransformationMatrix::identity(registry.len());
    for component in Component::ALL {
        let table = rates.get(&component).ok_or(TransformError::MissingComponent(component))?;
        let col = registry
            .lookup(component.name())
            .ok_or_else(|| TransformError::UnknownCommodity {
                component,
                commodity: component.name().into(),
            })?;
        let entries = table
            .products
            .iter()
            .map(|(c, v)| (c, *v))
            .chain(table.consumptions.iter().map(|(c, v)| (c, -*v)));
        for (name, signed) in entries {
            let row = registry.lookup(name).ok_or_else(|| TransformError::UnknownCommodity {
                component,
                commodity: name.clone(),
            })?;
            if !signed.is_finite() {
                return Err(TransformError::InvalidRate {
                    component,
                    commodity: name.clone(),
                });
            }
            q.add(row, col, signed * step_years);
        }
        if !table.power_kw_per_kg.is_finite() {
            return Err(TransformError::InvalidRate {
                component,
                commodity: "power".into(),
            });
        }
        q.add(power, col, table.power_kw_per_kg);
    }
    Ok(q)
}

/// Charge `rate * step_years` kg of spares per kg of every deployed plant.
pub fn add_maintenance(q: &mut TransformationMatrix, rate: f64, step_years: f64) {
    for component in Component::ALL {
        q.add(ids::SPARES, component.plant_commodity(), -rate * step_years);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropulsionSpec {
    /// s
    pub isp: f64,
    /// m/s²
    pub g0: f64,
    /// kg
    pub structure_mass: f64,
    /// kg per vehicle
    pub propellant_capacity: f64,
}

impl PropulsionSpec {
    pub fn baseline() -> Self {
        PropulsionSpec {
            isp: 420.0,
            g0: STANDARD_GRAVITY,
            structure_mass: 6_000.0,
            propellant_capacity: 65_000.0,
        }
    }

    pub fn exhaust_velocity(&self) -> f64 {
        self.isp * self.g0
    }
}

impl Default for PropulsionSpec {
    fn default() -> Self {
        PropulsionSpec::baseline()
    }
}

/// Propellant per kg of final mass: `exp(dv / (isp * g0)) - 1`.
pub fn propellant_factor(deltav: f64, spec: &PropulsionSpec) -> f64 {
    (deltav / spec.exhaust_velocity()).exp_m1()
}

/// Rocket-equation propellant for a burn that leaves `delivered_mass` (payload
/// plus structure) at the end of the leg.
pub fn propellant_for_leg(deltav: f64, delivered_mass: f64, spec: &PropulsionSpec) -> Result<f64, TransformError> {
    if deltav < 0.0 || deltav.is_nan() {
        return Err(TransformError::Negative { field: "deltav", value: deltav });
    }
    if delivered_mass < 0.0 || delivered_mass.is_nan() {
        return Err(TransformError::Negative {
            field: "delivered_mass",
            value: delivered_mass,
        });
    }
    Ok(delivered_mass * propellant_factor(deltav, spec))
}

/// Whether a single vehicle can hold the propellant.
pub fn leg_feasible(propellant: f64, spec: &PropulsionSpec) -> bool {
    propellant <= spec.propellant_capacity
}

/// Spares required to maintain `deployed_plant_mass` for `years`.
pub fn maintenance_demand(deployed_plant_mass: f64, rate: f64, years: u32) -> f64 {
    deployed_plant_mass * rate * f64::from(years)
}

/// Δv in m/s for each (from, to) pair; absent legs are not propulsive.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeltaVTable {
    legs: BTreeMap<(String, String), f64>,
}

impl DeltaVTable {
    pub fn baseline() -> Self {
        let mut table = DeltaVTable::default();
        table.insert("LEO", "LS", 5_870.0);
        table
    }

    pub fn insert(&mut self, from: impl Into<String>, to: impl Into<String>, deltav: f64) {
        self.legs.insert((from.into(), to.into()), deltav);
    }

    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        self.legs.get(&(from.to_string(), to.to_string())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.legs.iter().map(|((f, t), v)| (f.as_str(), t.as_str(), *v))
    }
}
