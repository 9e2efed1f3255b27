//! TOML scenario files.
//!
//! Every key is optional; anything left out takes the baseline mission value.
//! Unknown keys are rejected.
//!
//! ```toml
//! name = "isru_baseline"
//! isru_enabled = true
//! horizon_years = 3
//! maintenance_rate = 0.05          # fraction of plant mass per year
//!
//! [costs]
//! launch_per_kg = 5000.0           # $/kg, Earth -> LEO
//! lh2_per_kg = 5.97
//! lo2_per_kg = 0.15
//! spacecraft_manufacturing = 150e6 # $ per vehicle
//! spacecraft_operation_per_flight = 0.5e6
//! mixture_ratio = 6.0              # LO2 : LH2 by mass
//!
//! [propulsion]
//! isp = 420.0
//! g0 = 9.80665
//! structure_mass = 6000.0
//! propellant_capacity = 65000.0
//!
//! [demands]
//! o2_per_year = 10000.0            # at the habitat, every year
//! h2o_per_year = 5000.0
//! multiplier = 1.0
//! extra = [{ node = "HB", commodity = "H2", timestep = 2, amount = 10.0 }]
//!
//! [network]
//! nodes = [{ id = "Earth", kind = "earth" }, ...]
//! legs = [{ from = "LEO", to = "LS", kind = "propulsive", time_of_flight = 0 }, ...]
//! delta_v = [{ from = "LEO", to = "LS", deltav = 5870.0 }]
//!
//! [rates.MRE]                      # per kg plant; maps replace the baseline maps
//! products = { O2 = 16.67, metals = 15.16, slag = 6.06 }
//! consumptions = { dsoil = 37.89 }
//! power_kw_per_kg = -0.0942
//!
//! [disposal]
//! windows = [1, 2, 3]              # timesteps the disposal arc accepts waste
//!
//! [[sweeps]]
//! name = "launch"
//! parameter = "launch_cost"        # or "productivity_multiplier"
//! values = [1000.0, 2500.0, 5000.0, 10000.0]
//! isru_enabled = false             # optional override
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::network::NodeKind;
use crate::transform::{baseline_rates, Component, ComponentRates, PropulsionSpec, RateTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub isru_enabled: bool,
    pub horizon_years: u32,
    pub maintenance_rate: f64,
    pub costs: CostConfig,
    pub propulsion: PropulsionConfig,
    pub demands: DemandConfig,
    pub network: NetworkConfig,
    pub rates: RatesConfig,
    pub disposal: DisposalConfig,
    pub sweeps: Vec<SweepSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".into(),
            isru_enabled: true,
            horizon_years: 3,
            maintenance_rate: 0.05,
            costs: CostConfig::default(),
            propulsion: PropulsionConfig::default(),
            demands: DemandConfig::default(),
            network: NetworkConfig::default(),
            rates: RatesConfig::default(),
            disposal: DisposalConfig::default(),
            sweeps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub launch_per_kg: f64,
    pub lh2_per_kg: f64,
    pub lo2_per_kg: f64,
    pub spacecraft_manufacturing: f64,
    pub spacecraft_operation_per_flight: f64,
    pub mixture_ratio: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            launch_per_kg: 5_000.0,
            lh2_per_kg: 5.97,
            lo2_per_kg: 0.15,
            spacecraft_manufacturing: 150e6,
            spacecraft_operation_per_flight: 0.5e6,
            mixture_ratio: 6.0,
        }
    }
}

impl CostConfig {
    /// Earth price of one kg of mixed LO2/LH2 propellant.
    pub fn propellant_price(&self) -> f64 {
        (self.mixture_ratio * self.lo2_per_kg + self.lh2_per_kg) / (self.mixture_ratio + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropulsionConfig {
    pub isp: f64,
    pub g0: f64,
    pub structure_mass: f64,
    pub propellant_capacity: f64,
}

impl Default for PropulsionConfig {
    fn default() -> Self {
        let p = PropulsionSpec::baseline();
        PropulsionConfig {
            isp: p.isp,
            g0: p.g0,
            structure_mass: p.structure_mass,
            propellant_capacity: p.propellant_capacity,
        }
    }
}

impl From<PropulsionConfig> for PropulsionSpec {
    fn from(c: PropulsionConfig) -> Self {
        PropulsionSpec {
            isp: c.isp,
            g0: c.g0,
            structure_mass: c.structure_mass,
            propellant_capacity: c.propellant_capacity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    pub o2_per_year: f64,
    pub h2o_per_year: f64,
    /// Scales every demand, including `extra`.
    pub multiplier: f64,
    pub extra: Vec<DemandEntry>,
}

impl Default for DemandConfig {
    fn default() -> Self {
        DemandConfig {
            o2_per_year: 10_000.0,
            h2o_per_year: 5_000.0,
            multiplier: 1.0,
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandEntry {
    pub node: String,
    pub commodity: String,
    pub timestep: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegKind {
    /// Priced per kg lifted.
    Launch,
    /// Rocket-equation leg flown by spacecraft.
    Propulsive,
    /// Free surface haul.
    Surface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegConfig {
    pub from: String,
    pub to: String,
    pub kind: LegKind,
    #[serde(default)]
    pub time_of_flight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaVEntry {
    pub from: String,
    pub to: String,
    pub deltav: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub nodes: Vec<NodeConfig>,
    pub legs: Vec<LegConfig>,
    pub delta_v: Vec<DeltaVEntry>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let node = |id: &str, kind| NodeConfig { id: id.into(), kind };
        let leg = |from: &str, to: &str, kind| LegConfig {
            from: from.into(),
            to: to.into(),
            kind,
            time_of_flight: 0,
        };
        NetworkConfig {
            nodes: vec![
                node("Earth", NodeKind::Earth),
                node("LEO", NodeKind::Leo),
                node("LS", NodeKind::LunarSurface),
                node("HB", NodeKind::Habitat),
            ],
            legs: vec![
                leg("Earth", "LEO", LegKind::Launch),
                leg("LEO", "LS", LegKind::Propulsive),
                leg("LS", "HB", LegKind::Surface),
            ],
            delta_v: vec![DeltaVEntry {
                from: "LEO".into(),
                to: "LS".into(),
                deltav: 5_870.0,
            }],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateOverride {
    pub products: Option<BTreeMap<String, f64>>,
    pub consumptions: Option<BTreeMap<String, f64>>,
    pub power_kw_per_kg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(rename = "MRE")]
    pub mre: Option<RateOverride>,
    #[serde(rename = "SWE")]
    pub swe: Option<RateOverride>,
    #[serde(rename = "DWE")]
    pub dwe: Option<RateOverride>,
    pub excavator: Option<RateOverride>,
    #[serde(rename = "FSPS")]
    pub fsps: Option<RateOverride>,
}

impl RatesConfig {
    fn get(&self, component: Component) -> Option<&RateOverride> {
        match component {
            Component::Mre => self.mre.as_ref(),
            Component::Swe => self.swe.as_ref(),
            Component::Dwe => self.dwe.as_ref(),
            Component::Excavator => self.excavator.as_ref(),
            Component::Fsps => self.fsps.as_ref(),
        }
    }

    /// Baseline table with the overrides applied.
    pub fn resolve(&self) -> RateTable {
        let mut table = baseline_rates();
        for component in Component::ALL {
            let Some(o) = self.get(component) else { continue };
            let entry: &mut ComponentRates = table.get_mut(&component).expect("baseline has every component");
            if let Some(p) = &o.products {
                entry.products = p.clone();
            }
            if let Some(c) = &o.consumptions {
                entry.consumptions = c.clone();
            }
            if let Some(p) = o.power_kw_per_kg {
                entry.power_kw_per_kg = p;
            }
        }
        table
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisposalConfig {
    /// Departure timesteps at which waste may be disposed; all when absent.
    pub windows: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    LaunchCost,
    ProductivityMultiplier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default)]
    pub isru_enabled: Option<bool>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map(|p| before.len() - p).unwrap_or(before.len() + 1);
    (line, column)
}

/// Parse and validate a scenario file.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((1, 1));
        ScenarioError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

fn nonnegative(path: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be finite and nonnegative, got {v}")))
    }
}

fn positive(path: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be finite and positive, got {v}")))
    }
}

impl ScenarioConfig {
    /// Field-level invariants. Commodity names are resolved later, when the
    /// network is built, and surface as diagnostics there.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.horizon_years < 1 {
            return Err(invalid("horizon_years", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.maintenance_rate) {
            return Err(invalid("maintenance_rate", format!("must lie in [0, 1], got {}", self.maintenance_rate)));
        }
        let c = &self.costs;
        nonnegative("costs.launch_per_kg", c.launch_per_kg)?;
        nonnegative("costs.lh2_per_kg", c.lh2_per_kg)?;
        nonnegative("costs.lo2_per_kg", c.lo2_per_kg)?;
        nonnegative("costs.spacecraft_manufacturing", c.spacecraft_manufacturing)?;
        nonnegative("costs.spacecraft_operation_per_flight", c.spacecraft_operation_per_flight)?;
        nonnegative("costs.mixture_ratio", c.mixture_ratio)?;
        let p = &self.propulsion;
        positive("propulsion.isp", p.isp)?;
        positive("propulsion.g0", p.g0)?;
        nonnegative("propulsion.structure_mass", p.structure_mass)?;
        positive("propulsion.propellant_capacity", p.propellant_capacity)?;
        let d = &self.demands;
        nonnegative("demands.o2_per_year", d.o2_per_year)?;
        nonnegative("demands.h2o_per_year", d.h2o_per_year)?;
        nonnegative("demands.multiplier", d.multiplier)?;
        for (i, e) in d.extra.iter().enumerate() {
            nonnegative(&format!("demands.extra[{i}].amount"), e.amount)?;
        }
        for (i, e) in self.network.delta_v.iter().enumerate() {
            nonnegative(&format!("network.delta_v[{i}].deltav"), e.deltav)?;
        }
        for component in Component::ALL {
            let Some(o) = self.rates.get(component) else { continue };
            let base = format!("rates.{}", component.name());
            for (field, map) in [("products", &o.products), ("consumptions", &o.consumptions)] {
                for (name, v) in map.iter().flatten() {
                    positive(&format!("{base}.{field}.{name}"), *v)?;
                }
            }
            if let Some(pw) = o.power_kw_per_kg {
                let ok = pw.is_finite() && if component.is_generator() { pw > 0.0 } else { pw < 0.0 };
                if !ok {
                    let want = if component.is_generator() { "positive (generates)" } else { "negative (consumes)" };
                    return Err(invalid(format!("{base}.power_kw_per_kg"), format!("must be {want}, got {pw}")));
                }
            }
        }
        Ok(())
    }
}
