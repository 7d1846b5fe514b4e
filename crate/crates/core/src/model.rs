//! Domain types, physical constants and unit conventions.
//!
//! All quantities are SI. Frequencies are angular (rad/s). Charges carry
//! their sign, so an electron cloud has a negative `charge`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mathieu::MathieuParams;

/// Fundamental constants and particle masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Elementary charge (positive magnitude), C.
    pub q_e: f64,
    /// Electron mass, kg.
    pub m_e: f64,
    /// 40Ca+ ion mass, kg.
    pub m_ca40: f64,
    /// 9Be+ ion mass, kg.
    pub m_be9: f64,
    /// Proton mass, kg.
    pub m_p: f64,
}

/// Unified atomic mass unit (CODATA 2018), kg.
const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// CODATA 2018 constants; ion masses are neutral-atom masses (AME 2020)
/// minus one electron mass.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
    q_e: 1.602_176_634e-19,
    m_e: ELECTRON_MASS,
    m_ca40: 39.962_590_85 * ATOMIC_MASS_UNIT - ELECTRON_MASS,
    m_be9: 9.012_183_06 * ATOMIC_MASS_UNIT - ELECTRON_MASS,
    m_p: 1.672_621_923_69e-27,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

/// Charge and mass of a single trapped particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub charge: f64,
    pub mass: f64,
}

impl Species {
    pub fn new(name: impl Into<String>, charge: f64, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return domain(format!("species mass must be positive, got {mass}"));
        }
        if !charge.is_finite() || charge == 0.0 {
            return domain(format!("species charge must be finite and nonzero, got {charge}"));
        }
        Ok(Self { name: name.into(), charge, mass })
    }

    pub fn electron() -> Self {
        Self { name: "e-".into(), charge: -CODATA_2018.q_e, mass: CODATA_2018.m_e }
    }

    pub fn calcium40_ion() -> Self {
        Self { name: "40Ca+".into(), charge: CODATA_2018.q_e, mass: CODATA_2018.m_ca40 }
    }

    pub fn beryllium9_ion() -> Self {
        Self { name: "9Be+".into(), charge: CODATA_2018.q_e, mass: CODATA_2018.m_be9 }
    }

    pub fn proton() -> Self {
        Self { name: "p".into(), charge: CODATA_2018.q_e, mass: CODATA_2018.m_p }
    }

    /// Looks up one of the built-in species by name (`e`, `ca40`, `be9`, `p`).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "e" | "e-" | "electron" => Some(Self::electron()),
            "ca40" | "40ca+" | "ca" => Some(Self::calcium40_ion()),
            "be9" | "9be+" | "be" => Some(Self::beryllium9_ion()),
            "p" | "proton" => Some(Self::proton()),
            _ => None,
        }
    }
}

/// Whether a stored frequency (or drive depth) already includes the
/// wire-induced shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Bare,
    #[default]
    Effective,
}

/// Centre-of-mass mode of `count` identical particles in one trap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleCloud {
    pub species: Species,
    pub count: u32,
    /// Axial trap frequency, rad/s.
    pub trap_frequency: f64,
    pub frequency_form: Form,
    /// Signed effective distance to the attached electrode, m.
    pub effective_distance: f64,
}

impl ParticleCloud {
    pub fn new(
        species: Species,
        count: u32,
        trap_frequency: f64,
        frequency_form: Form,
        effective_distance: f64,
    ) -> Result<Self> {
        if count == 0 {
            return domain("particle count must be at least 1");
        }
        if !(trap_frequency > 0.0 && trap_frequency.is_finite()) {
            return domain(format!("trap frequency must be positive, got {trap_frequency}"));
        }
        if effective_distance == 0.0 || !effective_distance.is_finite() {
            return domain("effective distance must be finite and nonzero");
        }
        Ok(Self { species, count, trap_frequency, frequency_form, effective_distance })
    }

    /// COM charge `N q`.
    pub fn total_charge(&self) -> f64 {
        f64::from(self.count) * self.species.charge
    }

    /// COM mass `N m`.
    pub fn total_mass(&self) -> f64 {
        f64::from(self.count) * self.species.mass
    }
}

/// Conductor connecting the traps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireSpec {
    /// Capacitance to ground, F.
    pub capacitance_to_ground: f64,
}

impl WireSpec {
    pub fn new(capacitance_to_ground: f64) -> Result<Self> {
        if !(capacitance_to_ground > 0.0 && capacitance_to_ground.is_finite()) {
            return domain(format!("wire capacitance must be positive, got {capacitance_to_ground}"));
        }
        Ok(Self { capacitance_to_ground })
    }
}

/// Parametric modulation of the electron trap, `omega^2 [1 + depth cos(frequency t)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub depth: f64,
    /// Drive frequency, rad/s.
    pub frequency: f64,
    pub form: Form,
}

impl DriveParams {
    pub fn new(depth: f64, frequency: f64, form: Form) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return domain(format!("drive frequency must be positive, got {frequency}"));
        }
        if !(depth >= 0.0 && depth.is_finite()) {
            return domain(format!("drive depth must be non-negative, got {depth}"));
        }
        Ok(Self { depth, frequency, form })
    }
}

/// Maps the effective drive onto the standard Mathieu form
/// `x'' + [A - 2Q cos(2 xi)] x = 0` with `xi = omega_d t / 2`.
pub fn to_mathieu_params(drive: &DriveParams, omega_e_eff: f64) -> Result<MathieuParams> {
    if drive.form != Form::Effective {
        return domain("drive depth must be the effective depth eta'");
    }
    if !(omega_e_eff > 0.0 && omega_e_eff.is_finite()) {
        return domain(format!("effective electron frequency must be positive, got {omega_e_eff}"));
    }
    if !(drive.frequency > 0.0) {
        return domain("drive frequency must be positive");
    }
    let ratio = omega_e_eff / drive.frequency;
    let a = 4.0 * ratio * ratio;
    Ok(MathieuParams { a, q: -a * drive.depth / 2.0 })
}

/// Inverse of [`to_mathieu_params`] for a known drive frequency: returns the
/// effective drive and the effective electron frequency.
pub fn from_mathieu_params(params: &MathieuParams, omega_d: f64) -> Result<(DriveParams, f64)> {
    if !(params.a > 0.0) {
        return domain(format!("A must be positive to define a real trap frequency, got {}", params.a));
    }
    if !(omega_d > 0.0 && omega_d.is_finite()) {
        return domain(format!("drive frequency must be positive, got {omega_d}"));
    }
    let depth = -2.0 * params.q / params.a;
    let omega_e = omega_d * params.a.sqrt() / 2.0;
    let drive = DriveParams { depth, frequency: omega_d, form: Form::Effective };
    Ok((drive, omega_e))
}
