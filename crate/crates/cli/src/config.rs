//! Run configuration.
//!
//! Every section and key is optional; missing values take the defaults of
//! the nine-Be+/proton exchange setup. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ionwire::dynamics::integrator::{IntegratorConfig, Precision};
use ionwire::ensemble::{DetuningMode, Propagation};
use ionwire::mathieu::Tongue;
use ionwire::model::Species;
use ionwire::sweep::{AxisRange, SweepGrid};

use crate::error::Failure;
use crate::units::{Capacitance, Duration, Frequency, Length, Temperature};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub traps: Traps,
    pub wire: Wire,
    pub drive: Drive,
    pub sweep: Sweep,
    pub exchange: Exchange,
    pub ensemble: Ensemble,
    pub integrator: Integrator,
    pub output: Output,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Traps {
    /// Ion trap on electrode 1; the drive frequency is referenced to it.
    pub ion1: IonTrap,
    pub electron: ElectronTrap,
    /// Ion trap on electrode 2.
    pub ion2: IonTrap,
}

impl Default for Traps {
    fn default() -> Self {
        Self {
            ion1: IonTrap {
                species: "be9".into(),
                count: 9,
                frequency: Frequency::new(354.25e3),
                distance: Length::new(-3.2e-3),
                effective: true,
            },
            electron: ElectronTrap {
                species: "e".into(),
                count: 1000,
                distance: Length::new(3.2e-3),
                distance_2: Length::new(-3.2e-3),
            },
            ion2: IonTrap {
                species: "p".into(),
                count: 1,
                frequency: Frequency::new(354.25e3),
                distance: Length::new(3.2e-3),
                effective: true,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonTrap {
    pub species: String,
    pub count: u32,
    pub frequency: Frequency,
    /// Signed effective distance to the trap's electrode.
    pub distance: Length,
    /// Whether `frequency` already includes the wire-induced shift.
    pub effective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronTrap {
    pub species: String,
    pub count: u32,
    /// Signed effective distance to electrode 1.
    pub distance: Length,
    /// Signed effective distance to electrode 2.
    pub distance_2: Length,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Wire {
    pub capacitance: Capacitance,
    pub capacitance_2: Capacitance,
}

impl Default for Wire {
    fn default() -> Self {
        Self { capacitance: Capacitance::new(5.5e-12), capacitance_2: Capacitance::new(5.5e-12) }
    }
}

/// Electron drive, fixed through its working point: `w_d = ratio * w_1'`,
/// Mathieu `Q`, resonant sideband `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Drive {
    pub ratio: f64,
    pub q: f64,
    pub k: i64,
    pub tongue: Tongue,
}

impl Default for Drive {
    fn default() -> Self {
        Self { ratio: 25.0, q: -6.0, k: 0, tongue: Tongue::LowestPositive }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl From<Axis> for AxisRange {
    fn from(a: Axis) -> Self {
        AxisRange { min: a.min, max: a.max, steps: a.steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    /// Effective drive depth `eta'`.
    pub eta: Axis,
    /// `w_e' / w_d`.
    pub ratio: Axis,
    pub k: i64,
    /// Ion species entering `R_k`.
    pub species: String,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            eta: Axis { min: 0.0, max: 2.0, steps: 400 },
            ratio: Axis { min: 0.2, max: 2.0, steps: 400 },
            k: 0,
            species: "ca40".into(),
        }
    }
}

impl Sweep {
    pub fn grid(&self) -> Result<SweepGrid, Failure> {
        let ion = species(&self.species)?;
        let grid = SweepGrid {
            eta_range: self.eta.into(),
            ratio_range: self.ratio.into(),
            k: self.k,
            mass_ratio: ion.mass / Species::electron().mass,
        };
        grid.validate().map_err(|e| Failure::Config(format!("[sweep]: {e}")))?;
        Ok(grid)
    }
}

/// Single in-phase trajectory compared with the analytic exchange curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Exchange {
    pub t_ion1: Temperature,
    pub t_ion2: Temperature,
    /// Defaults to `t_ex + 1 ms`.
    pub t_end: Option<Duration>,
    pub samples: usize,
    /// `false` switches the wire coupling and the drive off.
    pub coupled: bool,
    pub propagation: Propagation,
    /// Repeat the run at half the tolerance and report the change.
    pub halving_check: bool,
}

impl Default for Exchange {
    fn default() -> Self {
        Self {
            t_ion1: Temperature::new(0.5e-3),
            t_ion2: Temperature::new(10.0),
            t_end: None,
            samples: 400,
            coupled: true,
            propagation: Propagation::PeriodMap,
            halving_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ensemble {
    pub n_traj: usize,
    pub seed: u64,
    /// Standard deviation of the detunings; one run per entry.
    pub delta_omega: OneOrMany<Frequency>,
    pub detuning: DetuningMode,
    pub propagation: Propagation,
    pub t_ion1: Temperature,
    pub t_electron: Temperature,
    pub t_ion2: Temperature,
    /// Defaults to `t_ex`.
    pub t_end: Option<Duration>,
    /// Number of intervals between 0 and `t_end`.
    pub samples: usize,
    pub write_trajectories: bool,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self {
            n_traj: 500,
            seed: 2024,
            delta_omega: OneOrMany::One(Frequency::new(0.1)),
            detuning: DetuningMode::Additive,
            propagation: Propagation::PeriodMap,
            t_ion1: Temperature::new(0.5e-3),
            t_electron: Temperature::new(10.0),
            t_ion2: Temperature::new(10.0),
            t_end: None,
            samples: 100,
            write_trajectories: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Integrator {
    pub tolerance: f64,
    pub order: u32,
    pub precision: Precision,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { tolerance: 1e-10, order: 12, precision: Precision::Double }
    }
}

impl Integrator {
    pub fn config(&self) -> Result<IntegratorConfig, Failure> {
        let cfg = IntegratorConfig {
            abs_tol: self.tolerance,
            rel_tol: self.tolerance,
            method_order: self.order,
            precision: self.precision,
            ..IntegratorConfig::default()
        };
        cfg.validate().map_err(|e| Failure::Config(format!("[integrator]: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: String,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// Thresholds evaluated with `--check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Check {
    /// Allowed range of the ensemble mean `T_P` at the last sample.
    pub mean_tp: Option<[Temperature; 2]>,
    /// Largest allowed `|T_2 - analytic|` within 1 ms of `t_ex`.
    pub max_deviation: Option<Temperature>,
}

pub fn species(name: &str) -> Result<Species, Failure> {
    Species::by_name(name).ok_or_else(|| Failure::Config(format!("unknown species '{name}' (e, ca40, be9, p)")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))
    }

    /// Reads a config file, or the resolved config embedded in a manifest.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let v: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let embedded = v
                .get("resolved_config")
                .and_then(|c| c.as_str())
                .ok_or_else(|| Failure::Config(format!("{}: no resolved_config in manifest", path.display())))?;
            return Self::parse(embedded);
        }
        Self::parse(&text).map_err(|e| match e {
            Failure::Config(msg) => Failure::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The config with every default written out.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.echo().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
