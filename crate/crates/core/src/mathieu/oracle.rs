//! Independent checks on the Floquet solver: the monodromy matrix over one
//! period, obtained by direct integration, and Hill's determinant for the
//! trace.

use std::f64::consts::PI;

use super::MathieuParams;
use crate::dd::DoubleDouble;
use crate::dynamics::integrator::{Extrapolator, IntegratorConfig, NystromSystem, Precision};
use crate::error::Result;
use crate::scalar::Real;

/// Two copies of the Mathieu equation integrated side by side.
struct MathieuPair {
    a: f64,
    q: f64,
}

impl<T: Real> NystromSystem<T> for MathieuPair {
    fn dim(&self) -> usize {
        2
    }

    fn drive_rate(&self) -> Option<T> {
        Some(T::lit(2.0))
    }

    fn accel(&self, _t: T, drive: (T, T), x: &[T], out: &mut [T]) {
        let w = T::lit(self.a) - T::lit(2.0 * self.q) * drive.0;
        out[0] = -w * x[0];
        out[1] = -w * x[1];
    }
}

/// Monodromy matrix `[[x1, x2], [x1', x2']]` at `xi = pi` for the basis
/// solutions `x1(0) = 1, x1'(0) = 0` and `x2(0) = 0, x2'(0) = 1`.
pub fn monodromy_matrix<T: Real>(params: MathieuParams, cfg: &IntegratorConfig) -> Result<[[T; 2]; 2]> {
    let sys = MathieuPair { a: params.a, q: params.q };
    let mut ex = Extrapolator::<T>::new(cfg, 2)?;
    let mut t = T::zero();
    let mut x = [T::one(), T::zero()];
    let mut v = [T::zero(), T::one()];
    ex.advance(&sys, &mut t, &mut x, &mut v, T::pi())?;
    Ok([[x[0], x[1]], [v[0], v[1]]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleVerdict {
    pub stable: bool,
    /// Characteristic exponent in `[0, 2)` for stable parameters.
    pub mu: Option<f64>,
    pub trace: f64,
}

/// Classifies `(A, Q)` from the monodromy matrix, integrated in double-double.
pub fn monodromy_oracle(params: MathieuParams) -> Result<OracleVerdict> {
    let params = MathieuParams::new(params.a, params.q)?;
    let cfg = IntegratorConfig {
        abs_tol: 1e-24,
        rel_tol: 1e-24,
        method_order: 16,
        precision: Precision::Extended,
        ..IntegratorConfig::default()
    };
    let m = monodromy_matrix::<DoubleDouble>(params, &cfg)?;
    let trace = m[0][0] + m[1][1];
    let two = DoubleDouble::lit(2.0);
    if trace.abs() > two {
        return Ok(OracleVerdict { stable: false, mu: None, trace: trace.hi() });
    }
    // Half-angle forms keep full accuracy next to |trace| = 2.
    let mu_f = if trace >= DoubleDouble::ZERO {
        let s = ((two - trace) / DoubleDouble::lit(4.0)).hi().max(0.0).sqrt();
        2.0 * s.asin() / PI
    } else {
        let s = ((two + trace) / DoubleDouble::lit(4.0)).hi().max(0.0).sqrt();
        1.0 - 2.0 * s.asin() / PI
    };
    let m12 = m[0][1].hi();
    let mu = if m12 * (PI * mu_f).sin() > 0.0 || mu_f == 0.0 { mu_f } else { 2.0 - mu_f };
    let mu = if mu >= 2.0 { mu - 2.0 } else { mu };
    Ok(OracleVerdict { stable: true, mu: Some(mu), trace: trace.hi() })
}

/// Trace of the monodromy matrix from Hill's determinant,
/// `2 - 4 Delta(0) sin^2(pi sqrt(A) / 2)`, falling back to direct integration
/// next to the poles at `A = 4k^2`.
pub(crate) fn trace(params: MathieuParams) -> Result<f64> {
    let MathieuParams { a, q } = params;
    let nearest = (a.max(0.0).sqrt() / 2.0).round();
    let pole_gap = (a - 4.0 * nearest * nearest).abs();
    if pole_gap < 1e-3 * (1.0 + q.abs()) {
        let cfg = IntegratorConfig::double(1e-14);
        let m = monodromy_matrix::<f64>(params, &cfg)?;
        return Ok(m[0][0] + m[1][1]);
    }
    // The tail of the determinant decays like Q^2 / K^3.
    let k_max = (2000.0 * q.abs().max(1.0).powf(2.0 / 3.0)) as i64 + (a.abs().sqrt() / 2.0) as i64;
    let xi = |k: i64| q / (a - 4.0 * (k * k) as f64);
    let (mut d_prev, mut d) = (1.0f64, 1.0f64);
    for k in (-k_max + 1)..=k_max {
        let next = d - xi(k) * xi(k - 1) * d_prev;
        d_prev = d;
        d = next;
    }
    let s2 = if a >= 0.0 {
        (PI * a.sqrt() / 2.0).sin().powi(2)
    } else {
        -(PI * (-a).sqrt() / 2.0).sinh().powi(2)
    };
    Ok(2.0 - 4.0 * d * s2)
}
