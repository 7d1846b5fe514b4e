//! Single-excitation dynamics of two ion modes coupled through one electron
//! mode, `H = sum_j g_j (e^{-i delta_j t} a_j^dag b + h.c.)`.
//!
//! Amplitudes are expressed in the frame where the Hamiltonian is time
//! independent: `c100` is unchanged, `c010` picks up `e^{i(delta1-delta2)t}`
//! and `c001` picks up `e^{-i delta1 t}` relative to the interaction picture.
//! For symmetric detunings this is the frame with an explicit
//! `delta b^dag b` term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::integrator::{integrate_samples, IntegratorConfig, NystromSystem};
use crate::error::{domain, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripartiteCoupling {
    pub g1: f64,
    pub g2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl TripartiteCoupling {
    pub fn symmetric(g: f64, delta: f64) -> Self {
        Self { g1: g, g2: g, delta1: delta, delta2: delta }
    }

    pub fn is_symmetric(&self) -> bool {
        self.g1 == self.g2 && self.delta1 == self.delta2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub c100: Complex64,
    pub c010: Complex64,
    pub c001: Complex64,
}

impl AmplitudeState {
    pub const INITIAL: Self = Self {
        c100: Complex64 { re: 1.0, im: 0.0 },
        c010: Complex64 { re: 0.0, im: 0.0 },
        c001: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn norm_sq(&self) -> f64 {
        self.c100.norm_sqr() + self.c010.norm_sqr() + self.c001.norm_sqr()
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        (self.c100 - other.c100)
            .norm()
            .max((self.c010 - other.c010).norm())
            .max((self.c001 - other.c001).norm())
    }
}

/// Closed-form amplitudes for `g1 = g2 = g`, `delta1 = delta2 = delta`,
/// starting from `|1,0,0>`.
pub fn amplitudes_at(g: f64, delta: f64, t: f64) -> AmplitudeState {
    if g == 0.0 {
        return AmplitudeState::INITIAL;
    }
    let dr = delta / g;
    let root = (8.0 + dr * dr).sqrt();
    let phase = Complex64::from_polar(1.0, -0.5 * g * t * dr);
    let arg = 0.5 * g * t * root;
    let (s, c) = arg.sin_cos();
    let common = phase * 0.5 * c + I * dr * phase * s / (2.0 * root);
    AmplitudeState {
        c100: 0.5 + common,
        c010: -0.5 + common,
        c001: -2.0 * I * phase * s / root,
    }
}

/// Real form of `i c' = H c` as the second-order system `c'' = -H^2 c`.
struct AmplitudeOde {
    h2: [[f64; 3]; 3],
}

impl AmplitudeOde {
    fn new(h: &[[f64; 3]; 3]) -> Self {
        let mut h2 = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                h2[i][j] = (0..3).map(|k| h[i][k] * h[k][j]).sum();
            }
        }
        Self { h2 }
    }
}

impl NystromSystem<f64> for AmplitudeOde {
    fn dim(&self) -> usize {
        6
    }

    fn accel(&self, _t: f64, _d: (f64, f64), x: &[f64], out: &mut [f64]) {
        // x = (re c, im c); H real, so H^2 acts on both parts separately.
        for part in 0..2 {
            for i in 0..3 {
                out[3 * part + i] = -(0..3).map(|j| self.h2[i][j] * x[3 * part + j]).sum::<f64>();
            }
        }
    }
}

/// Integrates the amplitude equations for arbitrary couplings and detunings,
/// returning the state at each of `times` (ascending).
pub fn numeric_amplitudes(coupling: &TripartiteCoupling, times: &[f64]) -> Result<Vec<AmplitudeState>> {
    let TripartiteCoupling { g1, g2, delta1, delta2 } = *coupling;
    let h = [[0.0, 0.0, g1], [0.0, delta1 - delta2, g2], [g1, g2, delta1]];
    let ode = AmplitudeOde::new(&h);
    // c(0) = (1, 0, 0); c'(0) = -i H c(0).
    let x0 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let v0 = [0.0, 0.0, 0.0, -h[0][0], -h[1][0], -h[2][0]];
    let cfg = IntegratorConfig::double(1e-14);
    let (samples, _) = integrate_samples(&ode, 0.0, &x0, &v0, times, &cfg)?;
    Ok(samples
        .into_iter()
        .map(|s| AmplitudeState {
            c100: Complex64::new(s.x[0], s.x[3]),
            c010: Complex64::new(s.x[1], s.x[4]),
            c001: Complex64::new(s.x[2], s.x[5]),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeKind {
    /// The ions end in a NOON state `(|1,0> +- i|0,1>)/sqrt 2`; for `2m = n + 1`
    /// this happens at half the swap time.
    Noon,
    FullExchange,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangePlan {
    pub m: u32,
    pub n: u32,
    /// Magnitude of the detuning; both signs work.
    pub delta: f64,
    pub tau: f64,
    pub kind: ExchangeKind,
}

/// Detuning and duration that return the electron to its initial state,
/// `delta = +-g sqrt(8n^2 / ((2m)^2 - n^2))`, `tau = (pi / 2|g|) sqrt(((2m)^2 - n^2) / 2)`.
pub fn plan_exchange(g: f64, m: i64, n: i64) -> Result<ExchangePlan> {
    if !(g != 0.0 && g.is_finite()) {
        return domain(format!("coupling must be finite and nonzero, got {g}"));
    }
    let (m, n) = (m.unsigned_abs(), n.unsigned_abs());
    let two_m = 2 * m;
    if two_m <= n {
        return domain(format!("need |2m| > |n|, got m = {m}, n = {n}"));
    }
    let d2 = (two_m * two_m - n * n) as f64;
    let delta = g.abs() * (8.0 * (n * n) as f64 / d2).sqrt();
    let tau = PI / (2.0 * g.abs()) * (d2 / 2.0).sqrt();
    let kind = if n % 2 == 1 {
        ExchangeKind::Noon
    } else if (m + n / 2) % 2 == 1 {
        ExchangeKind::FullExchange
    } else {
        ExchangeKind::Identity
    };
    let m = u32::try_from(m).map_err(|_| crate::Error::Domain("m out of range".into()))?;
    let n = u32::try_from(n).map_err(|_| crate::Error::Domain("n out of range".into()))?;
    Ok(ExchangePlan { m, n, delta, tau, kind })
}

/// `tau_swap = (pi / |g|) sqrt((2n + 1) / 2)`.
pub fn swap_time(g: f64, n: u32) -> f64 {
    PI / g.abs() * ((2.0 * f64::from(n) + 1.0) / 2.0).sqrt()
}

/// Coherent amplitudes `(alpha1, alpha2, beta)` under the resonant
/// Heisenberg maps with `g = sqrt(g1^2 + g2^2)`.
pub fn heisenberg_exchange(
    g1: f64,
    g2: f64,
    alpha1: Complex64,
    alpha2: Complex64,
    beta: Complex64,
    t: f64,
) -> (Complex64, Complex64, Complex64) {
    let g = g1.hypot(g2);
    if g == 0.0 {
        return (alpha1, alpha2, beta);
    }
    let (s, c) = (g * t).sin_cos();
    let (g1g, g2g) = (g1 / g, g2 / g);
    let a1 = alpha1 * (g1g * g1g * c + g2g * g2g) + alpha2 * (g1g * g2g * (c - 1.0)) - I * beta * (g1g * s);
    let a2 = alpha2 * (g2g * g2g * c + g1g * g1g) + alpha1 * (g1g * g2g * (c - 1.0)) - I * beta * (g2g * s);
    let b = beta * c - I * (alpha1 * g1g + alpha2 * g2g) * s;
    (a1, a2, b)
}

/// Detuned symmetric Heisenberg maps (`g1 = g2 = g`, `delta1 = delta2 = delta`).
pub fn heisenberg_detuned(
    g: f64,
    delta: f64,
    alpha1: Complex64,
    alpha2: Complex64,
    beta: Complex64,
    t: f64,
) -> (Complex64, Complex64, Complex64) {
    if g == 0.0 {
        return (alpha1, alpha2, beta * Complex64::from_polar(1.0, -delta * t));
    }
    let dr = delta / g;
    let root = (8.0 + dr * dr).sqrt();
    let phase = Complex64::from_polar(1.0, -g * t * dr / 2.0);
    let (s, c) = (g * t * root / 2.0).sin_cos();
    let sum = alpha1 + alpha2;
    let h = phase * sum * c + I * (dr * sum - 4.0 * beta) * phase * s / root;
    let a1 = 0.5 * (alpha1 - alpha2 + h);
    let a2 = 0.5 * (alpha2 - alpha1 + h);
    let b = phase * beta * c - I * (2.0 * sum + dr * beta) * phase * s / root;
    (a1, a2, b)
}

/// In-phase classical energy exchange with the electron at rest: returns
/// `(T_Be, T_P)` at time `t`. Temperatures stand in for energies, `T = E / k_B`.
pub fn analytic_temperatures(g1: f64, g2: f64, t_be0: f64, t_p0: f64, t: f64) -> (f64, f64) {
    let (a1, a2, _) = heisenberg_exchange(
        g1,
        g2,
        Complex64::new(t_be0.sqrt(), 0.0),
        Complex64::new(t_p0.sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
        t,
    );
    (a1.norm_sqr(), a2.norm_sqr())
}
