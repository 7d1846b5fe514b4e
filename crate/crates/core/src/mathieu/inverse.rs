//! Inverse problem: find `A` such that `(A, Q)` has a prescribed exponent.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::band::BandMatrix;
use super::{solve_floquet, MathieuParams, DEFAULT_TRUNCATION, MAX_TRUNCATION};
use crate::error::{domain, Error, Result};

/// Selects one stability region at fixed `Q`.
///
/// Regions are numbered by increasing `A` from 0. Region `j` is bounded by
/// the curves `mu = 0` and `mu = 1`; in even regions `mu` lies in `[0, 1]`,
/// in odd regions in `[1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tongue {
    Index(usize),
    /// The region containing the given `A`.
    Containing(f64),
    /// The lowest region in which the target exponent occurs with `A > 0`.
    #[default]
    LowestPositive,
}

impl fmt::Display for Tongue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tongue::Index(j) => write!(f, "#{j}"),
            Tongue::Containing(a) => write!(f, "containing A = {a}"),
            Tongue::LowestPositive => write!(f, "lowest with A > 0"),
        }
    }
}

fn truncation_for(j: usize, q: f64) -> usize {
    DEFAULT_TRUNCATION.max(j + 16 + q.abs().sqrt().ceil() as usize)
}

/// Edges `(lo, hi)` in `A` of stability region `j` at the given `Q`.
pub fn band_edges(q: f64, j: usize) -> (f64, f64) {
    let k = truncation_for(j, q);
    let e0 = BandMatrix::new(0.0, q, k).eigenvalue(j);
    let e1 = BandMatrix::new(1.0, q, k).eigenvalue(j);
    (e0.min(e1), e0.max(e1))
}

fn region_of(a: f64, q: f64) -> Option<usize> {
    let k = DEFAULT_TRUNCATION.max(((a.abs() + 2.0 * q.abs()).sqrt() / 2.0).ceil() as usize + 8);
    let n0 = BandMatrix::new(0.0, q, k).count_below(a);
    let n1 = BandMatrix::new(1.0, q, k).count_below(a);
    (n0 != n1).then(|| n0.min(n1))
}

/// Returns `(A, Q)` inside the selected region whose forward solve gives
/// `mu_target` to within `1e-10`.
pub fn inverse_solve_a(mu_target: f64, q: f64, tongue: Tongue) -> Result<MathieuParams> {
    if !(mu_target > 0.0 && mu_target < 2.0) {
        return domain(format!("target exponent must lie in (0, 2), got {mu_target}"));
    }
    if !q.is_finite() {
        return domain(format!("Q must be finite, got {q}"));
    }
    if (mu_target - 1.0).abs() < 1e-12 {
        return domain("mu = 1 lies on a stability boundary");
    }
    let parity = usize::from(mu_target > 1.0);
    let mu_f = if parity == 1 { 2.0 - mu_target } else { mu_target };

    let j = match tongue {
        Tongue::Index(j) => j,
        Tongue::Containing(a) => match region_of(a, q) {
            Some(j) => j,
            None => return domain(format!("A = {a} is not in a stability region at Q = {q}")),
        },
        Tongue::LowestPositive => {
            let mut j = parity;
            loop {
                let k = truncation_for(j, q);
                if BandMatrix::new(mu_f, q, k).eigenvalue(j) > 0.0 {
                    break j;
                }
                j += 2;
            }
        }
    };
    if j % 2 != parity {
        let (lo, hi) = band_edges(q, j);
        return Err(Error::NotFound { mu_target, region: tongue.to_string(), lo, hi });
    }

    let mut k = truncation_for(j, q);
    let mut last = f64::NAN;
    while k <= MAX_TRUNCATION {
        let a = BandMatrix::new(mu_f, q, k).eigenvalue(j);
        let p = MathieuParams { a, q };
        let sol = solve_floquet(p, None)?;
        if sol.stable {
            last = (sol.mu - mu_target).abs();
            if last < 1e-10 {
                return Ok(p);
            }
        }
        k *= 2;
    }
    Err(Error::Numerical(format!(
        "inverse solve for mu = {mu_target} in region {j} did not reproduce the target (last |dmu| = {last:e})"
    )))
}
