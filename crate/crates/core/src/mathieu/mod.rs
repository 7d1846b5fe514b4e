//! Floquet analysis of the standard Mathieu equation
//! `x'' + [A - 2Q cos(2 xi)] x = 0`.
//!
//! A bounded solution has the form `f = e^{i mu xi} sum_k c_k e^{2ik xi}` with
//! real `mu` and real coefficients. Substituting gives the three-term
//! recurrence `[A - (mu+2k)^2] c_k - Q (c_{k+1} + c_{k-1}) = 0`, i.e. `A` is an
//! eigenvalue of a symmetric tridiagonal matrix that depends on `mu`. The
//! solver locates the band containing `A` by Sturm counts, bisects for `mu`,
//! and recovers the coefficients by inverse iteration.

mod band;
mod inverse;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use band::BandMatrix;

pub use inverse::{band_edges, inverse_solve_a, Tongue};
pub use oracle::{monodromy_matrix, monodromy_oracle, OracleVerdict};

/// Initial truncation order `K` (coefficients `c_{-K}..=c_K`).
pub const DEFAULT_TRUNCATION: usize = 32;
/// Largest truncation order tried before giving up.
pub const MAX_TRUNCATION: usize = 512;
/// Growth rates `|Im mu|` (or distances of `|trace|` from 2) below this are
/// treated as marginal.
pub const INSTABILITY_TOL: f64 = 1e-9;
const TAIL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathieuParams {
    pub a: f64,
    pub q: f64,
}

impl MathieuParams {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !a.is_finite() || !q.is_finite() {
            return domain(format!("Mathieu parameters must be finite, got A = {a}, Q = {q}"));
        }
        Ok(Self { a, q })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSolution {
    pub params: MathieuParams,
    /// Real part of the characteristic exponent, in `[0, 2)`.
    pub mu: f64,
    /// Growth rate; zero for stable solutions.
    pub mu_imag: f64,
    /// `c_k` for `k = -K..=K`; empty for unstable solutions.
    pub coefficients: Vec<f64>,
    pub truncation_order: usize,
    pub wronskian_xi: f64,
    pub stable: bool,
    /// Set when the solution sits within [`INSTABILITY_TOL`] of a band edge.
    pub marginal: bool,
}

impl FloquetSolution {
    /// `c_k`, zero outside the stored range.
    pub fn coefficient(&self, k: i64) -> f64 {
        let kk = self.truncation_order as i64;
        if self.coefficients.is_empty() || k < -kk || k > kk {
            0.0
        } else {
            self.coefficients[(k + kk) as usize]
        }
    }

    /// Iterator over `(k, c_k)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let kk = self.truncation_order as i64;
        self.coefficients.iter().enumerate().map(move |(i, &c)| (i as i64 - kk, c))
    }

    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// `f(0) = sum_k c_k`.
    pub fn sum_coefficients(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// `sum_k (mu + 2k) c_k`, so that `f'(0) = i` times this.
    pub fn sum_weighted(&self) -> f64 {
        self.terms().map(|(k, c)| (self.mu + 2.0 * k as f64) * c).sum()
    }

    /// Parseval sum `S = sum_k ((mu + 2k) c_k)^2`.
    pub fn parseval_s(&self) -> f64 {
        self.terms()
            .map(|(k, c)| {
                let w = (self.mu + 2.0 * k as f64) * c;
                w * w
            })
            .sum()
    }

    /// Diagonal form `sum_k (mu + 2k) c_k^2` of the Wronskian, which equals
    /// the double sum for an exact Floquet solution.
    pub fn wronskian_diagonal(&self) -> f64 {
        self.terms().map(|(k, c)| (self.mu + 2.0 * k as f64) * c * c).sum()
    }

    /// Largest interior residual of the three-term recurrence.
    pub fn recurrence_residual(&self) -> f64 {
        recurrence_residual(self.params, self.mu, &self.coefficients)
    }
}

fn recurrence_residual(p: MathieuParams, mu: f64, c: &[f64]) -> f64 {
    if c.len() < 3 {
        return 0.0;
    }
    let kk = (c.len() / 2) as f64;
    let mut worst = 0.0f64;
    for i in 1..c.len() - 1 {
        let s = mu + 2.0 * (i as f64 - kk);
        let r = (p.a - s * s) * c[i] - p.q * (c[i + 1] + c[i - 1]);
        worst = worst.max(r.abs());
    }
    worst
}

/// Solves for the characteristic exponent and Fourier coefficients.
///
/// `trunc` overrides the initial truncation order; it is still doubled (up
/// to [`MAX_TRUNCATION`]) until the coefficient tail has decayed.
pub fn solve_floquet(params: MathieuParams, trunc: Option<usize>) -> Result<FloquetSolution> {
    let MathieuParams { a, q } = MathieuParams::new(params.a, params.q)?;
    if q == 0.0 {
        return Ok(undriven(params));
    }
    // The band edges must be resolved well inside the truncated spectrum.
    let spectral = ((a.abs() + 2.0 * q.abs()).sqrt() / 2.0).ceil() as usize + 8;
    let mut k_max = trunc.unwrap_or(DEFAULT_TRUNCATION).max(spectral).max(2);
    let limit = MAX_TRUNCATION.max(k_max);
    loop {
        let n0 = BandMatrix::new(0.0, q, k_max).count_below(a);
        let n1 = BandMatrix::new(1.0, q, k_max).count_below(a);
        if n0 == n1 {
            return unstable(params, n0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if BandMatrix::new(mid, q, k_max).count_below(a) == n0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu_f = 0.5 * (lo + hi);
        let v = BandMatrix::new(mu_f, q, k_max).eigenvector(a);
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tail = v[0].abs().max(v[v.len() - 1].abs());
        if tail < TAIL_TOL * peak {
            return Ok(finish(params, mu_f, v, k_max));
        }
        if 2 * k_max > limit {
            return Err(Error::Convergence {
                truncation: k_max,
                residual: recurrence_residual(params, mu_f, &v).max(tail / peak),
            });
        }
        k_max *= 2;
    }
}

fn undriven(params: MathieuParams) -> FloquetSolution {
    let a = params.a;
    if a < 0.0 {
        return FloquetSolution {
            params,
            mu: 0.0,
            mu_imag: (-a).sqrt(),
            coefficients: Vec::new(),
            truncation_order: 0,
            wronskian_xi: 0.0,
            stable: false,
            marginal: (-a).sqrt() <= INSTABILITY_TOL,
        };
    }
    let root = a.sqrt();
    let shift = (root / 2.0).floor();
    let mu = root - 2.0 * shift;
    let k_max = (shift as usize).max(1);
    let mut coefficients = vec![0.0; 2 * k_max + 1];
    coefficients[k_max + shift as usize] = 1.0;
    let margin = 2.0 - 2.0 * (std::f64::consts::PI * mu).cos().abs();
    FloquetSolution {
        params,
        mu,
        mu_imag: 0.0,
        coefficients,
        truncation_order: k_max,
        wronskian_xi: root,
        stable: true,
        marginal: margin < INSTABILITY_TOL,
    }
}

fn unstable(params: MathieuParams, gap: usize) -> Result<FloquetSolution> {
    // The gap above an even band closes at mu = 1, above an odd band at mu = 0.
    let mu = if gap % 2 == 1 { 1.0 } else { 0.0 };
    let trace = oracle::trace(params)?;
    let nu = ((trace.abs() / 2.0).max(1.0)).acosh() / std::f64::consts::PI;
    Ok(FloquetSolution {
        params,
        mu,
        mu_imag: nu,
        coefficients: Vec::new(),
        truncation_order: 0,
        wronskian_xi: 0.0,
        stable: false,
        marginal: nu <= INSTABILITY_TOL,
    })
}

fn finish(params: MathieuParams, mu_f: f64, v: Vec<f64>, k_max: usize) -> FloquetSolution {
    let n = v.len();
    let w: f64 = v
        .iter()
        .enumerate()
        .map(|(i, c)| (mu_f + 2.0 * (i as f64 - k_max as f64)) * c * c)
        .sum();
    let (mut mu, mut c) = if w < 0.0 {
        // Take the complex conjugate: c'_j = c_{-j-1}, mu' = 2 - mu.
        let c: Vec<f64> = (0..n).map(|i| if i + 1 < n { v[n - 2 - i] } else { 0.0 }).collect();
        (2.0 - mu_f, c)
    } else {
        (mu_f, v)
    };
    if mu >= 2.0 {
        mu -= 2.0;
        c.rotate_right(1);
        c[0] = 0.0;
    }
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= norm);
    let peak_idx = (0..n).max_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs())).unwrap_or(k_max);
    let pivot = if c[k_max].abs() > 1e-12 * c[peak_idx].abs() { k_max } else { peak_idx };
    if c[pivot] < 0.0 {
        c.iter_mut().for_each(|x| *x = -*x);
    }
    let margin = 2.0 - 2.0 * (std::f64::consts::PI * mu).cos().abs();
    let mut sol = FloquetSolution {
        params,
        mu,
        mu_imag: 0.0,
        coefficients: c,
        truncation_order: k_max,
        wronskian_xi: 0.0,
        stable: true,
        marginal: margin < INSTABILITY_TOL,
    };
    sol.wronskian_xi = double_sum(&sol);
    sol
}

fn double_sum(sol: &FloquetSolution) -> f64 {
    // sum_{k,k'} c_k c_k' (mu + k + k') = mu S0^2 + 2 S0 S1
    let s0 = sol.sum_coefficients();
    let s1: f64 = sol.terms().map(|(k, c)| k as f64 * c).sum();
    sol.mu * s0 * s0 + 2.0 * s0 * s1
}

/// `W_xi = sum_{k,k'} c_k c_k' (mu + k + k')`.
pub fn wronskian_xi(sol: &FloquetSolution) -> Result<f64> {
    if !sol.stable {
        return domain("the Wronskian is defined for stable solutions only");
    }
    Ok(double_sum(sol))
}

/// `D_k = |c_k| sqrt((mu + 2k) / W_xi)`.
pub fn d_factor(sol: &FloquetSolution, k: i64) -> Result<f64> {
    if !sol.stable {
        return domain("D_k is defined for stable solutions only");
    }
    let s = sol.mu + 2.0 * k as f64;
    if s <= 0.0 {
        return domain(format!("mu + 2k = {s} is not positive for k = {k}"));
    }
    let w = sol.wronskian_xi;
    if w <= 0.0 {
        return domain(format!("W_xi = {w} is not positive"));
    }
    Ok(sol.coefficient(k).abs() * (s / w).sqrt())
}

#[cfg(test)]
mod tests;
