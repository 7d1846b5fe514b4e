//! Equivalent-circuit model of particles coupled through a shared wire.
//!
//! A cloud of `N` particles with charge `q` and mass `m` at effective
//! distance `D` behaves as a series LC with `L = N m D^2 / (N q)^2` and
//! `C = 1 / (omega^2 L)`. The wire adds the capacitance `C_w` to ground,
//! which shifts the trap frequency by `sqrt(1 + alpha)` with
//! `alpha = C / C_w`, and couples two clouds through
//! `gamma = (N_a q_a)(N_b q_b) / (C_w D_a D_b)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mathieu::{d_factor, FloquetSolution};
use crate::model::{DriveParams, Form, ParticleCloud, WireSpec};

/// Default relative tolerance of the resonance condition.
pub const RESONANCE_TOL: f64 = 1e-6;

/// `N q^2 / (C_w m D^2)`: the squared frequency shift induced by the wire.
fn wire_shift(cloud: &ParticleCloud, wire: &WireSpec) -> f64 {
    let d = cloud.effective_distance;
    let n = f64::from(cloud.count);
    n * cloud.species.charge * cloud.species.charge / (wire.capacitance_to_ground * cloud.species.mass * d * d)
}

/// Bare trap frequency, undoing the wire shift for effective-form clouds.
pub fn bare_frequency(cloud: &ParticleCloud, wire: &WireSpec) -> Result<f64> {
    match cloud.frequency_form {
        Form::Bare => Ok(cloud.trap_frequency),
        Form::Effective => {
            let w2 = cloud.trap_frequency * cloud.trap_frequency - wire_shift(cloud, wire);
            if w2 <= 0.0 {
                return domain(format!(
                    "effective frequency {} rad/s of {} is below the wire shift",
                    cloud.trap_frequency, cloud.species.name
                ));
            }
            Ok(w2.sqrt())
        }
    }
}

/// `alpha = N q^2 / (C_w m omega^2 D^2)` with the bare frequency.
pub fn alpha(cloud: &ParticleCloud, wire: &WireSpec) -> Result<f64> {
    let w = bare_frequency(cloud, wire)?;
    Ok(wire_shift(cloud, wire) / (w * w))
}

/// Equivalent inductance `L = N m D^2 / (N q)^2` and capacitance `C = 1 / (omega^2 L)`.
pub fn equivalent_circuit(cloud: &ParticleCloud, wire: &WireSpec) -> Result<(f64, f64)> {
    let w = bare_frequency(cloud, wire)?;
    let d = cloud.effective_distance;
    let l = cloud.total_mass() * d * d / (cloud.total_charge() * cloud.total_charge());
    Ok((l, 1.0 / (w * w * l)))
}

/// `gamma = (N_a q_a)(N_b q_b) / (C_w D_a D_b)`, in N/m.
pub fn gamma(a: &ParticleCloud, b: &ParticleCloud, wire: &WireSpec) -> f64 {
    a.total_charge() * b.total_charge()
        / (wire.capacitance_to_ground * a.effective_distance * b.effective_distance)
}

/// `omega' = omega sqrt(1 + alpha)`.
pub fn effective_frequency(cloud: &ParticleCloud, wire: &WireSpec) -> Result<f64> {
    match cloud.frequency_form {
        Form::Effective => Ok(cloud.trap_frequency),
        Form::Bare => Ok(cloud.trap_frequency * (1.0 + alpha(cloud, wire)?).sqrt()),
    }
}

/// Converts a drive to its effective form, `eta' = eta / (1 + alpha_e)`.
pub fn effective_drive(drive: &DriveParams, electron: &ParticleCloud, wire: &WireSpec) -> Result<DriveParams> {
    match drive.form {
        Form::Effective => Ok(*drive),
        Form::Bare => {
            let a = alpha(electron, wire)?;
            Ok(DriveParams { depth: drive.depth / (1.0 + a), frequency: drive.frequency, form: Form::Effective })
        }
    }
}

/// Ion cloud `a` and driven electron cloud `b` on one wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub a: ParticleCloud,
    pub b: ParticleCloud,
    pub wire: WireSpec,
    pub drive: Option<DriveParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub gamma: f64,
    pub omega_a_eff: f64,
    pub omega_b_eff: f64,
    /// Signed rate `g_k`, rad/s.
    pub g_k: f64,
    /// Ion-wire-ion reference rate for two copies of cloud `a`, rad/s.
    pub g_ii_reference: f64,
    pub r_k: f64,
}

/// Checks `(mu + 2k) omega_d / 2 = omega_i'` to relative tolerance `tol`.
pub fn check_resonance(mu: f64, k: i64, omega_d: f64, omega_i_eff: f64, tol: f64) -> Result<()> {
    let s = mu + 2.0 * k as f64;
    let sideband = s * omega_d / 2.0;
    let rel = (sideband - omega_i_eff).abs() / omega_i_eff;
    if rel > tol {
        return Err(Error::Resonance { required_omega_d: 2.0 * omega_i_eff / s, relative_error: rel });
    }
    Ok(())
}

/// `g_k = gamma c_k / (2 sqrt(M_i M_e omega_i' W))` with `W = (omega_d/2) W_xi`.
pub fn g_rate(pair: &CoupledPair, sol: &FloquetSolution, k: i64) -> Result<f64> {
    g_rate_with_tol(pair, sol, k, RESONANCE_TOL)
}

pub fn g_rate_with_tol(pair: &CoupledPair, sol: &FloquetSolution, k: i64, tol: f64) -> Result<f64> {
    let Some(drive) = pair.drive else {
        return domain("g_k needs the electron drive");
    };
    if !sol.stable || sol.wronskian_xi <= 0.0 {
        return domain("g_k needs a stable Floquet solution with positive Wronskian");
    }
    let omega_i = effective_frequency(&pair.a, &pair.wire)?;
    check_resonance(sol.mu, k, drive.frequency, omega_i, tol)?;
    let w = drive.frequency / 2.0 * sol.wronskian_xi;
    let g = gamma(&pair.a, &pair.b, &pair.wire);
    Ok(g * sol.coefficient(k) / (2.0 * (pair.a.total_mass() * pair.b.total_mass() * omega_i * w).sqrt()))
}

/// Ion-wire-ion coupling `gamma / (2 omega' sqrt(M_a M_b))`, which reduces to
/// `0.5 gamma / (omega' m)` for identical clouds.
pub fn g_ii(a: &ParticleCloud, b: &ParticleCloud, wire: &WireSpec) -> Result<f64> {
    let wa = effective_frequency(a, wire)?;
    let wb = effective_frequency(b, wire)?;
    let g = gamma(a, b, wire);
    Ok((g / (2.0 * (wa * wb).sqrt() * (a.total_mass() * b.total_mass()).sqrt())).abs())
}

/// `R_k = D_k sqrt(m_i / m_e)`.
pub fn relative_strength(sol: &FloquetSolution, k: i64, mass_ratio: f64) -> Result<f64> {
    if !(mass_ratio > 0.0) {
        return domain(format!("mass ratio must be positive, got {mass_ratio}"));
    }
    Ok(d_factor(sol, k)? * mass_ratio.sqrt())
}

/// `R_0 / sqrt(2(2n + 1))`.
pub fn coupling_gain(r0: f64, n: u32) -> f64 {
    r0 / (2.0 * (2.0 * f64::from(n) + 1.0)).sqrt()
}

/// Ratio of the direct-wire swap time `pi / (2 g_direct)` to the
/// electron-mediated exchange time `pi / sqrt(g_1^2 + g_2^2)`.
pub fn exchange_gain(g1: f64, g2: f64, g_direct: f64) -> Result<f64> {
    if !(g_direct.abs() > 0.0 && g_direct.is_finite()) {
        return domain(format!("direct coupling must be nonzero and finite, got {g_direct}"));
    }
    Ok(g1.hypot(g2) / (2.0 * g_direct.abs()))
}

/// Full report for a pair, with the reference rate computed for two copies
/// of cloud `a` on the same wire at mirrored distance.
pub fn report(pair: &CoupledPair, sol: &FloquetSolution, k: i64) -> Result<CouplingReport> {
    let alpha_a = alpha(&pair.a, &pair.wire)?;
    let alpha_b = alpha(&pair.b, &pair.wire)?;
    let g_k = g_rate(pair, sol, k)?;
    let g_ref = g_ii(&pair.a, &pair.a, &pair.wire)?;
    Ok(CouplingReport {
        alpha_a,
        alpha_b,
        gamma: gamma(&pair.a, &pair.b, &pair.wire),
        omega_a_eff: effective_frequency(&pair.a, &pair.wire)?,
        omega_b_eff: effective_frequency(&pair.b, &pair.wire)?,
        g_k,
        g_ii_reference: g_ref,
        r_k: (g_k / g_ref).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathieu::{solve_floquet, MathieuParams};
    use crate::model::Species;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ca(d: f64, w: f64) -> ParticleCloud {
        ParticleCloud::new(Species::calcium40_ion(), 1, w, Form::Bare, d).unwrap()
    }

    const WIRE: WireSpec = WireSpec { capacitance_to_ground: 5.5e-12 };

    #[test]
    fn alpha_scales() {
        let w = 2.0 * PI * 354.25e3;
        let a1 = alpha(&ca(3.2e-3, w), &WIRE).unwrap();
        let a2 = alpha(&ca(6.4e-3, w), &WIRE).unwrap();
        assert!((a1 / a2 - 4.0).abs() < 1e-12);
        let mut four = ca(3.2e-3, w);
        four.count = 4;
        assert!((alpha(&four, &WIRE).unwrap() / a1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn calcium_circuit_identity() {
        let cloud = ca(3.2e-3, 2.0 * PI * 354.25e3);
        let (_, c) = equivalent_circuit(&cloud, &WIRE).unwrap();
        let a = alpha(&cloud, &WIRE).unwrap();
        assert!((a - c / WIRE.capacitance_to_ground).abs() < 1e-12 * a);
        assert!(a > 0.0 && a < 1e-3);
    }

    #[test]
    fn effective_round_trip() {
        let mut cloud = ca(3.2e-3, 1e5);
        let a = alpha(&cloud, &WIRE).unwrap();
        let weff = effective_frequency(&cloud, &WIRE).unwrap();
        assert!((weff - 1e5 * (1.0 + a).sqrt()).abs() < 1e-9);
        cloud.trap_frequency = weff;
        cloud.frequency_form = Form::Effective;
        assert!((bare_frequency(&cloud, &WIRE).unwrap() - 1e5).abs() < 1e-8);
        assert!((alpha(&cloud, &WIRE).unwrap() - a).abs() < 1e-12 * a);
    }

    #[test]
    fn alpha_three_doubles_frequency() {
        // Choose D so that alpha = 3.
        let w = 1e4;
        let s = Species::calcium40_ion();
        let d = (s.charge * s.charge / (WIRE.capacitance_to_ground * s.mass * w * w * 3.0)).sqrt();
        let cloud = ParticleCloud::new(s, 1, w, Form::Bare, d).unwrap();
        assert!((effective_frequency(&cloud, &WIRE).unwrap() - 2.0 * w).abs() < 1e-9);
    }

    #[test]
    fn gamma_sign_and_symmetry() {
        let ion = ca(3.2e-3, 1e6);
        let e = ParticleCloud::new(Species::electron(), 1, 1e8, Form::Bare, 3.2e-3).unwrap();
        assert!(gamma(&ion, &e, &WIRE) < 0.0);
        assert_eq!(gamma(&ion, &e, &WIRE), gamma(&e, &ion, &WIRE));
    }

    #[test]
    fn effective_depth() {
        let e = ParticleCloud::new(Species::electron(), 1000, 2.0 * PI * 12e6, Form::Bare, 3.2e-3).unwrap();
        let drive = DriveParams::new(1.6, 2.0 * PI * 9e6, Form::Bare).unwrap();
        let eff = effective_drive(&drive, &e, &WIRE).unwrap();
        let a = alpha(&e, &WIRE).unwrap();
        assert!((eff.depth * (1.0 + a) - 1.6).abs() < 1e-14);
        assert_eq!(eff.form, Form::Effective);
    }

    #[test]
    fn resonance_violation_reports_required_drive() {
        match check_resonance(0.08, 0, 25.0, 1.01, 1e-6) {
            Err(Error::Resonance { required_omega_d, relative_error }) => {
                assert!((required_omega_d - 25.25).abs() < 1e-12);
                assert!((relative_error - 0.01 / 1.01).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(check_resonance(0.08, 0, 25.0, 1.0, 1e-6).is_ok());
    }

    #[test]
    fn exchange_gain_of_identical_rates() {
        // n = 0 gain for a symmetric pair is R_0 / sqrt(2).
        let g = 3.0;
        let gd = 0.1;
        assert!((exchange_gain(g, g, gd).unwrap() - coupling_gain(g / gd, 0)).abs() < 1e-12);
        assert!(exchange_gain(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gain_formula() {
        assert!((coupling_gain(2f64.sqrt(), 0) - 1.0).abs() < 1e-15);
        assert!((coupling_gain(111.5, 1) - 45.52).abs() < 0.01);
    }

    #[test]
    fn undriven_relative_strength() {
        let s = solve_floquet(MathieuParams { a: 0.25, q: 0.0 }, None).unwrap();
        assert!((relative_strength(&s, 0, 72847.3).unwrap() - 72847.3f64.sqrt()).abs() < 1e-9);
        assert!(relative_strength(&s, 0, 0.0).is_err());
    }

    fn pair_for(sol: &FloquetSolution, omega_i: f64, n_ion: u32, n_e: u32, d_ion: f64, d_e: f64, c: f64) -> CoupledPair {
        let omega_d = 2.0 * omega_i / sol.mu;
        let omega_e = omega_d * sol.params.a.sqrt() / 2.0;
        CoupledPair {
            a: ParticleCloud::new(Species::calcium40_ion(), n_ion, omega_i, Form::Effective, d_ion).unwrap(),
            b: ParticleCloud::new(Species::electron(), n_e, omega_e, Form::Effective, d_e).unwrap(),
            wire: WireSpec::new(c).unwrap(),
            drive: Some(DriveParams::new(-2.0 * sol.params.q / sol.params.a, omega_d, Form::Effective).unwrap()),
        }
    }

    #[test]
    fn zero_gamma_gives_zero_rate() {
        let sol = solve_floquet(MathieuParams { a: 0.25, q: 0.0 }, None).unwrap();
        let mut pair = pair_for(&sol, 1e6, 1, 1, 3.2e-3, 3.2e-3, 5.5e-12);
        pair.b.species.charge = 1e-300;
        assert!(g_rate(&pair, &sol, 0).unwrap().abs() < 1e-200);
    }

    proptest! {
        #[test]
        fn circuit_identities(n in 1u32..2000, d in 1e-4f64..1e-2, w in 1e4f64..1e8, c in 1e-13f64..1e-10) {
            let s = Species::beryllium9_ion();
            let cloud = ParticleCloud::new(s.clone(), n, w, Form::Bare, d).unwrap();
            let wire = WireSpec::new(c).unwrap();
            let (l, cc) = equivalent_circuit(&cloud, &wire).unwrap();
            let a = alpha(&cloud, &wire).unwrap();
            prop_assert!((a - cc / c).abs() <= 1e-12 * a);
            let other = ParticleCloud::new(Species::electron(), 7, 3.0 * w, Form::Bare, -2.0 * d).unwrap();
            let (l2, _) = equivalent_circuit(&other, &wire).unwrap();
            let g = gamma(&cloud, &other, &wire).abs();
            let circuit = (cloud.total_mass() * other.total_mass() / (l * l2 * c * c)).sqrt();
            prop_assert!((g - circuit).abs() <= 1e-12 * g);
        }

        #[test]
        fn relative_strength_matches_rate_ratio(
            eta in 0.0f64..1.8, ratio in 0.25f64..1.8, c in 1e-12f64..1e-11,
            d1 in 1e-3f64..5e-3, d2 in 1e-3f64..5e-3,
        ) {
            let a = 4.0 * ratio * ratio;
            let sol = solve_floquet(MathieuParams { a, q: -a * eta / 2.0 }, None).unwrap();
            prop_assume!(sol.stable && !sol.marginal && sol.mu > 1e-3 && sol.wronskian_xi > 1e-6);
            let pair = pair_for(&sol, 2.0 * PI * 354.25e3, 1, 1, d1, d2, c);
            let g = g_rate(&pair, &sol, 0).unwrap();
            // Reference ion-ion pair at the same distance as the ion.
            let gii = g_ii(&pair.a, &pair.a, &pair.wire).unwrap();
            let ion = Species::calcium40_ion();
            let r = relative_strength(&sol, 0, ion.mass / Species::electron().mass).unwrap();
            // gamma_ie / gamma_ii = (q_e D_i) / (q_i D_e), so rescale by the distances.
            let expected = r * d1 / d2;
            prop_assert!(((g / gii).abs() - expected).abs() <= 1e-10 * expected);
        }
    }
}
