//! Centre-of-mass motion of a Be+ cloud, a driven electron cloud and a
//! proton, with the electron sharing electrode 1 with the Be+ cloud and
//! electrode 2 with the proton:
//!
//! ```text
//! x_Be'' = -w_Be^2 x_Be - gamma_Be x_e / M_Be
//! x_e''  = -w_e^2 [1 + eta cos(w_d t)] x_e - gamma_Be x_Be / M_e - gamma_P x_P / M_e
//! x_P''  = -w_P^2 x_P - gamma_P x_e / M_P
//! ```
//!
//! Frequencies and the drive depth are effective (wire-shifted) values and
//! masses are cloud totals `N m`.
//!
//! Integration runs in scaled units: time in units of `1 / w_Be` and
//! positions in micrometres.

use serde::{Deserialize, Serialize};

use super::integrator::{integrate_samples, IntegratorConfig, NystromSystem, StepStats};
use crate::coupling::{gamma, g_rate, CoupledPair};
use crate::error::{domain, Result};
use crate::mathieu::{FloquetSolution, MathieuParams};
use crate::model::{to_mathieu_params, DriveParams, Form, ParticleCloud, WireSpec, CODATA_2018};
use crate::scalar::Real;

const LENGTH_UNIT: f64 = 1e-6;

/// Be+ cloud, electron cloud and proton on two wires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriSystem {
    /// Attached to electrode 1.
    pub be: ParticleCloud,
    /// `effective_distance` is the distance to electrode 1.
    pub e: ParticleCloud,
    /// Signed distance of the electron cloud to electrode 2, m.
    pub e_distance_2: f64,
    /// Attached to electrode 2.
    pub p: ParticleCloud,
    pub wires: [WireSpec; 2],
    /// Effective drive of the electron trap.
    pub drive: DriveParams,
}

impl TriSystem {
    pub fn new(
        be: ParticleCloud,
        e: ParticleCloud,
        e_distance_2: f64,
        p: ParticleCloud,
        wires: [WireSpec; 2],
        drive: DriveParams,
    ) -> Result<Self> {
        for c in [&be, &e, &p] {
            if c.frequency_form != Form::Effective {
                return domain(format!("{} trap frequency must be given in effective form", c.species.name));
            }
        }
        if drive.form != Form::Effective {
            return domain("electron drive must be given in effective form");
        }
        if e_distance_2 == 0.0 || !e_distance_2.is_finite() {
            return domain("electron distance to electrode 2 must be finite and nonzero");
        }
        Ok(Self { be, e, e_distance_2, p, wires, drive })
    }

    /// The electron cloud as seen from electrode `wire` (0 or 1).
    pub fn electron_on(&self, wire: usize) -> ParticleCloud {
        let mut e = self.e.clone();
        if wire == 1 {
            e.effective_distance = self.e_distance_2;
        }
        e
    }

    /// The ion on electrode `wire` paired with the electron cloud.
    pub fn pair(&self, wire: usize) -> CoupledPair {
        let ion = if wire == 0 { self.be.clone() } else { self.p.clone() };
        CoupledPair { a: ion, b: self.electron_on(wire), wire: self.wires[wire], drive: Some(self.drive) }
    }

    /// `(gamma_Be,e, gamma_P,e)`, N/m.
    pub fn gammas(&self) -> (f64, f64) {
        (
            gamma(&self.be, &self.electron_on(0), &self.wires[0]),
            gamma(&self.p, &self.electron_on(1), &self.wires[1]),
        )
    }

    pub fn mathieu_params(&self) -> Result<MathieuParams> {
        to_mathieu_params(&self.drive, self.e.trap_frequency)
    }

    /// Signed RWA rates `(g_1, g_2)` of the Be+ and proton modes to the
    /// `k`-th electron sideband, rad/s.
    pub fn coupling_rates(&self, sol: &FloquetSolution, k: i64) -> Result<(f64, f64)> {
        Ok((g_rate(&self.pair(0), sol, k)?, g_rate(&self.pair(1), sol, k)?))
    }

    pub fn coefficients(&self) -> EomCoefficients {
        let (gamma_be, gamma_p) = self.gammas();
        EomCoefficients {
            omega_be: self.be.trap_frequency,
            omega_e: self.e.trap_frequency,
            omega_p: self.p.trap_frequency,
            eta: self.drive.depth,
            omega_d: self.drive.frequency,
            gamma_be,
            gamma_p,
            mass_be: self.be.total_mass(),
            mass_e: self.e.total_mass(),
            mass_p: self.p.total_mass(),
        }
    }
}

/// Numbers entering the equations of motion, SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EomCoefficients {
    pub omega_be: f64,
    pub omega_e: f64,
    pub omega_p: f64,
    pub eta: f64,
    pub omega_d: f64,
    pub gamma_be: f64,
    pub gamma_p: f64,
    pub mass_be: f64,
    pub mass_e: f64,
    pub mass_p: f64,
}

impl EomCoefficients {
    /// Copy with the electron and proton frequencies replaced.
    pub fn with_frequencies(&self, omega_e: f64, omega_p: f64) -> Self {
        Self { omega_e, omega_p, ..*self }
    }

    /// Same system with both couplings switched off.
    pub fn decoupled(&self) -> Self {
        Self { gamma_be: 0.0, gamma_p: 0.0, ..*self }
    }

    /// Instantaneous energies `(E_Be, E_e, E_P)`, J. The electron energy uses
    /// the instantaneous spring constant `w_e^2 [1 + eta cos(w_d t)]`.
    pub fn energies(&self, s: &MotionState<f64>) -> (f64, f64, f64) {
        let osc = |m: f64, w2: f64, x: f64, v: f64| 0.5 * m * (v * v + w2 * x * x);
        let pump = 1.0 + self.eta * (self.omega_d * s.t).cos();
        (
            osc(self.mass_be, self.omega_be * self.omega_be, s.x[0], s.v[0]),
            osc(self.mass_e, self.omega_e * self.omega_e * pump, s.x[1], s.v[1]),
            osc(self.mass_p, self.omega_p * self.omega_p, s.x[2], s.v[2]),
        )
    }

    /// Energies divided by `k_B`: `(T_Be, T_e_inst, T_P)`, K.
    pub fn temperatures(&self, s: &MotionState<f64>) -> (f64, f64, f64) {
        let (a, b, c) = self.energies(s);
        let kb = CODATA_2018.k_b;
        (a / kb, b / kb, c / kb)
    }

    pub(crate) fn scaled<T: Real>(&self) -> ScaledEom<T> {
        let w0 = self.omega_be;
        let s = |v: f64| T::lit(v / (w0 * w0));
        ScaledEom {
            w_be2: T::one(),
            w_e2: s(self.omega_e * self.omega_e),
            w_p2: s(self.omega_p * self.omega_p),
            eta: T::lit(self.eta),
            k_be: s(self.gamma_be / self.mass_be),
            k_e_be: s(self.gamma_be / self.mass_e),
            k_e_p: s(self.gamma_p / self.mass_e),
            k_p: s(self.gamma_p / self.mass_p),
            rate: T::lit(self.omega_d / w0),
        }
    }
}

/// Positions (m), velocities (m/s) and time (s) of the three modes, ordered
/// Be, e, P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionState<T> {
    pub t: T,
    pub x: [T; 3],
    pub v: [T; 3],
}

impl<T: Real> MotionState<T> {
    pub fn to_f64(&self) -> MotionState<f64> {
        MotionState { t: self.t.approx(), x: self.x.map(|v| v.approx()), v: self.v.map(|v| v.approx()) }
    }

    pub fn from_f64(s: &MotionState<f64>) -> Self {
        MotionState { t: T::lit(s.t), x: s.x.map(T::lit), v: s.v.map(T::lit) }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(&self.v).all(|v| v.is_finite())
    }
}

/// Accelerations `(x_Be'', x_e'', x_P'')` in SI units.
pub fn eom_rhs<T: Real>(c: &EomCoefficients, s: &MotionState<T>) -> [T; 3] {
    let l = |v: f64| T::lit(v);
    let pump = T::one() + l(c.eta) * (l(c.omega_d) * s.t).sin_cos().1;
    [
        -l(c.omega_be * c.omega_be) * s.x[0] - l(c.gamma_be / c.mass_be) * s.x[1],
        -l(c.omega_e * c.omega_e) * pump * s.x[1]
            - l(c.gamma_be / c.mass_e) * s.x[0]
            - l(c.gamma_p / c.mass_e) * s.x[2],
        -l(c.omega_p * c.omega_p) * s.x[2] - l(c.gamma_p / c.mass_p) * s.x[1],
    ]
}

/// The equations of motion in scaled units.
pub(crate) struct ScaledEom<T> {
    w_be2: T,
    w_e2: T,
    w_p2: T,
    eta: T,
    k_be: T,
    k_e_be: T,
    k_e_p: T,
    k_p: T,
    rate: T,
}

impl<T: Real> ScaledEom<T> {
    pub fn period(&self) -> T {
        T::lit(2.0) * T::pi() / self.rate
    }
}

impl<T: Real> NystromSystem<T> for ScaledEom<T> {
    fn dim(&self) -> usize {
        3
    }

    fn drive_rate(&self) -> Option<T> {
        Some(self.rate)
    }

    fn accel(&self, _t: T, drive: (T, T), x: &[T], out: &mut [T]) {
        out[0] = -self.w_be2 * x[0] - self.k_be * x[1];
        out[1] = -self.w_e2 * (T::one() + self.eta * drive.0) * x[1] - self.k_e_be * x[0] - self.k_e_p * x[2];
        out[2] = -self.w_p2 * x[2] - self.k_p * x[1];
    }
}

/// Conversion between SI states and the scaled integration variables.
#[derive(Clone, Copy)]
pub(crate) struct Units {
    w0: f64,
}

impl Units {
    pub fn new(c: &EomCoefficients) -> Self {
        Self { w0: c.omega_be }
    }

    pub fn time_to_scaled<T: Real>(&self, t: T) -> T {
        t * T::lit(self.w0)
    }

    pub fn scale_state<T: Real>(&self, s: &MotionState<T>) -> (T, [T; 3], [T; 3]) {
        let l = T::lit(LENGTH_UNIT);
        let lv = T::lit(LENGTH_UNIT) * T::lit(self.w0);
        (self.time_to_scaled(s.t), s.x.map(|x| x / l), s.v.map(|v| v / lv))
    }

    pub fn unscale_state<T: Real>(&self, t: T, x: &[T], v: &[T]) -> MotionState<T> {
        let l = T::lit(LENGTH_UNIT);
        let lv = T::lit(LENGTH_UNIT) * T::lit(self.w0);
        MotionState { t: t / T::lit(self.w0), x: [x[0] * l, x[1] * l, x[2] * l], v: [v[0] * lv, v[1] * lv, v[2] * lv] }
    }
}

/// Integrates from `init` and returns the state at each of `times`
/// (seconds, ascending, not before `init.t`).
pub fn integrate_at<T: Real>(
    c: &EomCoefficients,
    init: &MotionState<T>,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<MotionState<T>>, StepStats)> {
    if !init.is_finite() {
        return domain("initial state must be finite");
    }
    let units = Units::new(c);
    let sys = c.scaled::<T>();
    let (t0, x0, v0) = units.scale_state(init);
    let targets: Vec<T> = times.iter().map(|&t| units.time_to_scaled(T::lit(t))).collect();
    let (samples, stats) = integrate_samples(&sys, t0, &x0, &v0, &targets, cfg)?;
    Ok((samples.iter().map(|s| units.unscale_state(s.t, &s.x, &s.v)).collect(), stats))
}

/// Integrates from `init` to `t_end`, sampling every `sample_every` seconds
/// and at `t_end`.
pub fn integrate<T: Real>(
    c: &EomCoefficients,
    init: &MotionState<T>,
    t_end: f64,
    cfg: &IntegratorConfig,
    sample_every: f64,
) -> Result<(Vec<MotionState<T>>, StepStats)> {
    let t0 = init.t.approx();
    if !(t_end > t0) {
        return domain(format!("end time {t_end} must follow the start time {t0}"));
    }
    if !(sample_every > 0.0) {
        return domain("sampling interval must be positive");
    }
    let mut times = vec![t0];
    let n = ((t_end - t0) / sample_every).floor() as u64;
    times.extend((1..=n).map(|i| t0 + i as f64 * sample_every).filter(|&t| t < t_end));
    times.push(t_end);
    let (mut out, stats) = integrate_at(c, init, &times[1..], cfg)?;
    out.insert(0, *init);
    Ok((out, stats))
}

/// Initial temperatures of the three modes, K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Temperatures {
    pub be: f64,
    pub e: f64,
    pub p: f64,
}

/// Initial state at `t = 0`: Be+ at phase 0, proton at phase `phi_p` with
/// COM energy `k_B T_P`, and the electron on its Floquet orbit with
/// amplitude `A_e = sqrt(8 k_B T_e / (M_e w_d^2 S))` and phase `phi_e`.
pub fn initial_state_from_temperatures(
    temps: Temperatures,
    phi_p: f64,
    phi_e: f64,
    sol: &FloquetSolution,
    c: &EomCoefficients,
) -> Result<MotionState<f64>> {
    if !(temps.be >= 0.0 && temps.e >= 0.0 && temps.p >= 0.0) {
        return domain("temperatures must be non-negative");
    }
    if !sol.stable {
        return domain("the electron needs a stable Floquet solution");
    }
    let kb = CODATA_2018.k_b;
    let oscillator = |t: f64, m: f64, w: f64, phi: f64| {
        let v = (2.0 * kb * t / m).sqrt();
        (v / w * phi.sin(), v * phi.cos())
    };
    let (x_be, v_be) = oscillator(temps.be, c.mass_be, c.omega_be, 0.0);
    let (x_p, v_p) = oscillator(temps.p, c.mass_p, c.omega_p, phi_p);
    let s = sol.parseval_s();
    let amp = (8.0 * kb * temps.e / (c.mass_e * c.omega_d * c.omega_d * s)).sqrt();
    let x_e = amp * phi_e.sin() * sol.sum_coefficients();
    let v_e = amp * c.omega_d / 2.0 * phi_e.cos() * sol.sum_weighted();
    Ok(MotionState { t: 0.0, x: [x_be, x_e, x_p], v: [v_be, v_e, v_p] })
}

/// In-phase start used for comparison with the closed-form exchange: all
/// positions zero, electron at rest, ion velocities from their energies.
pub fn in_phase_state(t_be: f64, t_p: f64, c: &EomCoefficients) -> MotionState<f64> {
    let kb = CODATA_2018.k_b;
    MotionState {
        t: 0.0,
        x: [0.0; 3],
        v: [(2.0 * kb * t_be / c.mass_be).sqrt(), 0.0, (2.0 * kb * t_p / c.mass_p).sqrt()],
    }
}

/// `w_b = w_d S / (2 W_xi)`: the frequency that turns `k_B T_e` into a
/// coherent-state occupation.
pub fn effective_electron_frequency(sol: &FloquetSolution, omega_d: f64) -> Result<f64> {
    if !sol.stable || sol.wronskian_xi <= 0.0 {
        return domain("effective electron frequency needs a stable solution");
    }
    Ok(omega_d * sol.parseval_s() / (2.0 * sol.wronskian_xi))
}

/// One row of the trajectory CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    #[serde(rename = "x_Be")]
    pub x_be: f64,
    #[serde(rename = "v_Be")]
    pub v_be: f64,
    pub x_e: f64,
    pub v_e: f64,
    #[serde(rename = "x_P")]
    pub x_p: f64,
    #[serde(rename = "v_P")]
    pub v_p: f64,
    #[serde(rename = "T_Be")]
    pub t_be: f64,
    #[serde(rename = "T_e_inst")]
    pub t_e_inst: f64,
    #[serde(rename = "T_P")]
    pub t_p: f64,
}

impl TrajectoryRow {
    pub fn new(c: &EomCoefficients, s: &MotionState<f64>) -> Self {
        let (t_be, t_e_inst, t_p) = c.temperatures(s);
        Self { t: s.t, x_be: s.x[0], v_be: s.v[0], x_e: s.x[1], v_e: s.v[1], x_p: s.x[2], v_p: s.v[2], t_be, t_e_inst, t_p }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use crate::dynamics::integrator::Precision;
    use crate::mathieu::solve_floquet;
    use std::f64::consts::PI;

    fn toy() -> EomCoefficients {
        EomCoefficients {
            omega_be: 2.0 * PI * 1e3,
            omega_e: 2.0 * PI * 7e3,
            omega_p: 2.0 * PI * 1.1e3,
            eta: 0.3,
            omega_d: 2.0 * PI * 10e3,
            gamma_be: 2e-20,
            gamma_p: 3e-20,
            mass_be: 1e-25,
            mass_e: 1e-27,
            mass_p: 2e-27,
        }
    }

    #[test]
    fn rhs_by_hand() {
        let c = toy();
        let s = MotionState { t: 1.3e-4, x: [1e-6, -2e-6, 3e-6], v: [0.0; 3] };
        let a = eom_rhs(&c, &s);
        let pump = 1.0 + 0.3 * (c.omega_d * 1.3e-4).cos();
        let expect = [
            -c.omega_be.powi(2) * 1e-6 + 2e-20 / 1e-25 * 2e-6,
            c.omega_e.powi(2) * pump * 2e-6 - 2e-20 / 1e-27 * 1e-6 - 3e-20 / 1e-27 * 3e-6,
            -c.omega_p.powi(2) * 3e-6 + 3e-20 / 2e-27 * 2e-6,
        ];
        for i in 0..3 {
            assert!((a[i] - expect[i]).abs() < 1e-12 * expect[i].abs(), "{i}");
        }
        let dd = eom_rhs(&c, &MotionState::<DoubleDouble>::from_f64(&s));
        for i in 0..3 {
            assert!((dd[i].approx() - a[i]).abs() < 1e-12 * a[i].abs());
        }
    }

    #[test]
    fn coupling_is_reciprocal() {
        let c = toy();
        let force_on_be = c.gamma_be / c.mass_be * c.mass_be;
        let force_on_e = c.gamma_be / c.mass_e * c.mass_e;
        assert!((force_on_be - force_on_e).abs() < 1e-32);
    }

    #[test]
    fn scaled_system_matches_si() {
        let c = toy();
        let s = MotionState { t: 2.1e-4, x: [1e-6, -2e-6, 3e-6], v: [1e-3, 0.0, 2e-3] };
        let units = Units::new(&c);
        let (t, x, _) = units.scale_state(&s);
        let sys = c.scaled::<f64>();
        let mut out = [0.0; 3];
        let phase = sys.rate * t;
        sys.accel(t, (phase.cos(), phase.sin()), &x, &mut out);
        let si = eom_rhs(&c, &s);
        for i in 0..3 {
            let back = out[i] * LENGTH_UNIT * c.omega_be * c.omega_be;
            assert!((back - si[i]).abs() < 1e-10 * si[i].abs());
        }
    }

    #[test]
    fn undriven_uncoupled_oscillators() {
        let c = EomCoefficients { eta: 0.0, ..toy().decoupled() };
        let init = MotionState { t: 0.0, x: [1e-6, 2e-6, 0.0], v: [0.0, 0.0, 5e-3] };
        let t_end = 3e-3;
        let (out, _) = integrate(&c, &init, t_end, &IntegratorConfig::double(1e-13), 1e-3).unwrap();
        assert_eq!(out.len(), 4);
        let last = out.last().unwrap();
        assert_eq!(last.t, t_end);
        let wt = |w: f64| w * t_end;
        assert!((last.x[0] - 1e-6 * wt(c.omega_be).cos()).abs() < 1e-17);
        assert!((last.x[1] - 2e-6 * wt(c.omega_e).cos()).abs() < 1e-17);
        assert!((last.x[2] - 5e-3 / c.omega_p * wt(c.omega_p).sin()).abs() < 1e-17);
    }

    #[test]
    fn sampling_grid() {
        let c = toy();
        let init = MotionState { t: 0.0, x: [0.0; 3], v: [1e-3, 0.0, 0.0] };
        let (out, _) = integrate(&c, &init, 2.5e-4, &IntegratorConfig::double(1e-10), 1e-4).unwrap();
        let ts: Vec<f64> = out.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 4);
        assert_eq!(ts[3], 2.5e-4);
        assert!(integrate(&c, &init, 0.0, &IntegratorConfig::double(1e-10), 1e-4).is_err());
    }

    #[test]
    fn proton_at_zero_phase() {
        let c = toy();
        let sol = solve_floquet(MathieuParams::new(0.25, 0.0).unwrap(), None).unwrap();
        let t = Temperatures { be: 1e-3, e: 2.0, p: 3.0 };
        let s = initial_state_from_temperatures(t, 0.0, 0.0, &sol, &c).unwrap();
        assert_eq!(s.x[2], 0.0);
        assert!((s.v[2] - (2.0 * CODATA_2018.k_b * 3.0 / c.mass_p).sqrt()).abs() < 1e-15 * s.v[2]);
        for phi in [0.3, 1.7, 4.0] {
            let s = initial_state_from_temperatures(t, phi, 0.0, &sol, &c).unwrap();
            let (tb, _, tp) = c.temperatures(&s);
            assert!((tb - 1e-3).abs() < 1e-15 && (tp - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn undriven_electron_energy() {
        // For A = 0.25 the electron is a plain oscillator at w_d / 4.
        let c = EomCoefficients { eta: 0.0, omega_e: toy().omega_d / 4.0, ..toy() };
        let sol = solve_floquet(MathieuParams::new(0.25, 0.0).unwrap(), None).unwrap();
        let t = Temperatures { be: 0.0, e: 2.0, p: 0.0 };
        for phi in [0.0, 0.9, 2.5] {
            let s = initial_state_from_temperatures(t, 0.0, phi, &sol, &c).unwrap();
            let (_, te, _) = c.temperatures(&s);
            assert!((te - 2.0).abs() < 1e-13);
        }
        let w = effective_electron_frequency(&sol, c.omega_d).unwrap();
        assert!((w - c.omega_e).abs() < 1e-9);
    }

    #[test]
    fn rejects_unstable_solution() {
        let sol = solve_floquet(MathieuParams::new(1.0, 0.5).unwrap(), None).unwrap();
        let t = Temperatures { be: 0.0, e: 1.0, p: 0.0 };
        assert!(initial_state_from_temperatures(t, 0.0, 0.0, &sol, &toy()).is_err());
        assert!(effective_electron_frequency(&sol, 1.0).is_err());
    }

    #[test]
    fn extended_precision_round_trip() {
        let c = toy();
        let init = MotionState::<DoubleDouble>::from_f64(&MotionState {
            t: 0.0,
            x: [1e-6, -3e-6, 2e-6],
            v: [1e-3, 2e-2, -1e-3],
        });
        let cfg = IntegratorConfig {
            abs_tol: 1e-22,
            rel_tol: 1e-22,
            method_order: 16,
            precision: Precision::Extended,
            ..IntegratorConfig::default()
        };
        let (fwd, _) = integrate_at(&c, &init, &[2e-3], &cfg).unwrap();
        let (back, _) = integrate_at(&c, &fwd[0], &[0.0], &cfg).unwrap();
        let (a, b) = (init.to_f64(), back[0].to_f64());
        for i in 0..3 {
            assert!((a.x[i] - b.x[i]).abs() < 1e-15 * 3e-6);
            assert!((a.v[i] - b.v[i]).abs() < 1e-15 * 2e-2);
        }
    }
}
