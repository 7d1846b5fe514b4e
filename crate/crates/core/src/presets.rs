//! Ready-made configurations.

use std::f64::consts::PI;

use crate::dynamics::TriSystem;
use crate::error::Result;
use crate::mathieu::{solve_floquet, FloquetSolution, Tongue};
use crate::model::{DriveParams, Form, ParticleCloud, Species, WireSpec, CODATA_2018};
use crate::sweep::{locate_working_point, WorkingPoint};

/// Ion trap frequency of the exchange-cooling setup, rad/s.
pub const ION_FREQUENCY: f64 = 2.0 * PI * 354.25e3;
/// Drive frequency in units of the ion frequency.
pub const DRIVE_RATIO: f64 = 25.0;
/// Mathieu `Q` of the typical working point.
pub const WORKING_Q: f64 = -6.0;
/// Effective electrode distance, m.
pub const ELECTRODE_DISTANCE: f64 = 3.2e-3;
/// Wire capacitance, F.
pub const WIRE_CAPACITANCE: f64 = 5.5e-12;
pub const BE_COUNT: u32 = 9;
pub const ELECTRON_COUNT: u32 = 1000;
pub const PROTON_COUNT: u32 = 1;

/// `w_d = 25 w_i'`, `Q = -6` in the lowest positive tongue, resonant on
/// `k = 0`; `R_0` for 40Ca+.
pub fn black_cross() -> Result<WorkingPoint> {
    locate_working_point(DRIVE_RATIO, WORKING_Q, 0, Tongue::LowestPositive, CODATA_2018.m_ca40 / CODATA_2018.m_e)
}

/// Nine Be+ ions and a proton, each coupled through its own wire to a cloud
/// of 1000 electrons driven at the typical working point, with
/// `-D_1,Be = D_1,e = -D_2,e = D_2,P = 3.2 mm`.
pub fn be_proton_exchange() -> Result<(TriSystem, FloquetSolution)> {
    be_proton_exchange_with(ELECTRODE_DISTANCE)
}

/// Same setup with the Be+ electrode distance scaled so that `g_1 = g_2`.
pub fn be_proton_exchange_balanced() -> Result<(TriSystem, FloquetSolution)> {
    let (sys, sol) = be_proton_exchange()?;
    let (g1, g2) = sys.coupling_rates(&sol, 0)?;
    be_proton_exchange_with(ELECTRODE_DISTANCE * g1 / g2)
}

fn be_proton_exchange_with(be_distance: f64) -> Result<(TriSystem, FloquetSolution)> {
    let wp = black_cross()?;
    let omega_d = DRIVE_RATIO * ION_FREQUENCY;
    let omega_e = omega_d * wp.a.sqrt() / 2.0;
    let d = ELECTRODE_DISTANCE;
    let be = ParticleCloud::new(Species::beryllium9_ion(), BE_COUNT, ION_FREQUENCY, Form::Effective, -be_distance)?;
    let e = ParticleCloud::new(Species::electron(), ELECTRON_COUNT, omega_e, Form::Effective, d)?;
    let p = ParticleCloud::new(Species::proton(), PROTON_COUNT, ION_FREQUENCY, Form::Effective, d)?;
    let wire = WireSpec::new(WIRE_CAPACITANCE)?;
    let drive = DriveParams::new(wp.eta_prime, omega_d, Form::Effective)?;
    let sys = TriSystem::new(be, e, -d, p, [wire, wire], drive)?;
    let sol = solve_floquet(sys.mathieu_params()?, None)?;
    Ok((sys, sol))
}
