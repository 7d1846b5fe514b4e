//! Stability and coupling-strength maps over `(eta', w_e'/w_d)`, and the
//! inverse search for a working point.

use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mathieu::{d_factor, inverse_solve_a, solve_floquet, MathieuParams, Tongue};

/// Inclusive linear axis `[min, max]` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let r = Self { min, max, steps };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return domain(format!("axis needs at least 2 steps, got {}", self.steps));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return domain(format!("axis range [{}, {}] must be finite and increasing", self.min, self.max));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub eta_range: AxisRange,
    /// Range of `w_e' / w_d`.
    pub ratio_range: AxisRange,
    pub k: i64,
    /// `m_i / m_e`.
    pub mass_ratio: f64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        self.eta_range.validate()?;
        self.ratio_range.validate()?;
        if self.ratio_range.min <= 0.0 {
            return domain("w_e'/w_d must be positive");
        }
        if !(self.mass_ratio > 0.0 && self.mass_ratio.is_finite()) {
            return domain(format!("mass ratio must be positive, got {}", self.mass_ratio));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.eta_range.steps * self.ratio_range.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub eta_prime: f64,
    /// `w_e' / w_d`.
    pub ratio: f64,
    pub stable: bool,
    pub mu: Option<f64>,
    pub r_k: Option<f64>,
    /// `w_e' / w_i'` with the ion resonant with sideband `k`.
    pub freq_ratio: Option<f64>,
    /// Solver failure, if any.
    pub error: Option<String>,
}

/// Evaluates one grid point.
pub fn sweep_cell(eta_prime: f64, ratio: f64, k: i64, mass_ratio: f64) -> SweepCell {
    let a = 4.0 * ratio * ratio;
    let params = MathieuParams { a, q: -a * eta_prime / 2.0 };
    let mut cell = SweepCell { eta_prime, ratio, stable: false, mu: None, r_k: None, freq_ratio: None, error: None };
    match solve_floquet(params, None) {
        Err(e) => cell.error = Some(e.to_string()),
        Ok(sol) if !sol.stable => {}
        Ok(sol) => {
            cell.stable = true;
            cell.mu = Some(sol.mu);
            if let Ok(d) = d_factor(&sol, k) {
                cell.r_k = Some(d * mass_ratio.sqrt());
                cell.freq_ratio = Some(ratio * 2.0 / (sol.mu + 2.0 * k as f64));
            }
        }
    }
    cell
}

/// Evaluates every cell, `eta'` varying slowest. Cells run in parallel but
/// come back in grid order.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<SweepCell>> {
    grid.validate()?;
    let n_ratio = grid.ratio_range.steps;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let eta = grid.eta_range.value(i / n_ratio);
            let ratio = grid.ratio_range.value(i % n_ratio);
            sweep_cell(eta, ratio, grid.k, grid.mass_ratio)
        })
        .collect())
}

#[derive(Serialize)]
struct CsvRow {
    eta_prime: f64,
    ratio_e_d: f64,
    stable: bool,
    mu: Option<f64>,
    #[serde(rename = "R_k")]
    r_k: Option<f64>,
    ratio_e_i: Option<f64>,
}

/// Writes `eta_prime,ratio_e_d,stable,mu,R_k,ratio_e_i`; unstable and failed
/// cells leave the last three fields empty.
pub fn write_csv<W: Write>(cells: &[SweepCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(CsvRow {
            eta_prime: c.eta_prime,
            ratio_e_d: c.ratio,
            stable: c.stable,
            mu: c.mu,
            r_k: c.r_k,
            ratio_e_i: c.freq_ratio,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata written next to the sweep CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub grid: SweepGrid,
    pub cells: usize,
    pub stable_cells: usize,
    pub failed_cells: usize,
    pub code_version: String,
}

pub fn summarize(grid: &SweepGrid, cells: &[SweepCell]) -> SweepSummary {
    SweepSummary {
        grid: *grid,
        cells: cells.len(),
        stable_cells: cells.iter().filter(|c| c.stable).count(),
        failed_cells: cells.iter().filter(|c| c.error.is_some()).count(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub stable_cells: usize,
    pub above_threshold: usize,
    pub max_r: Option<f64>,
}

impl RegionStats {
    pub fn fraction_above(&self) -> Option<f64> {
        (self.stable_cells > 0).then(|| self.above_threshold as f64 / self.stable_cells as f64)
    }
}

/// Where `R_1` is large, split at `eta' = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarrownessReport {
    pub threshold: f64,
    /// Cells with `eta' <= 1`.
    pub low_drive: RegionStats,
    /// Cells with `eta' > 1`.
    pub high_drive: RegionStats,
}

pub fn narrowness_from_cells(cells: &[SweepCell], threshold: f64) -> NarrownessReport {
    let stats = |high: bool| {
        let mut s = RegionStats { stable_cells: 0, above_threshold: 0, max_r: None };
        for c in cells.iter().filter(|c| c.stable && (c.eta_prime > 1.0) == high) {
            s.stable_cells += 1;
            if let Some(r) = c.r_k {
                if r > threshold {
                    s.above_threshold += 1;
                }
                s.max_r = Some(s.max_r.map_or(r, |m: f64| m.max(r)));
            }
        }
        s
    };
    NarrownessReport { threshold, low_drive: stats(false), high_drive: stats(true) }
}

/// Runs a `k = 1` sweep and reports how `R_1` is distributed between weak
/// (`eta' <= 1`) and strong drive.
pub fn k1_narrowness_check(grid: &SweepGrid, threshold: f64) -> Result<NarrownessReport> {
    if grid.k != 1 {
        return domain(format!("narrowness check needs k = 1, got k = {}", grid.k));
    }
    Ok(narrowness_from_cells(&run_sweep(grid)?, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    pub mu: f64,
    pub a: f64,
    pub q: f64,
    pub eta_prime: f64,
    /// `w_e' / w_d`.
    pub omega_e_over_omega_d: f64,
    /// `w_e' / w_i'`.
    pub omega_e_over_omega_i: f64,
    pub k: i64,
    pub r_k: f64,
}

/// `mu = 2 w_i' / w_d - 2k`, evaluated exactly when `w_d / w_i'` is a ratio
/// of small integers.
pub fn resonant_mu(omega_d_over_omega_i: f64, k: i64) -> Result<f64> {
    if !(omega_d_over_omega_i > 0.0 && omega_d_over_omega_i.is_finite()) {
        return domain(format!("w_d / w_i' must be positive, got {omega_d_over_omega_i}"));
    }
    let exact = Ratio::<i64>::approximate_float(omega_d_over_omega_i)
        .filter(|r| *r.denom() <= 1 << 20 && *r.numer() <= 1 << 40)
        .filter(|r| *r.numer() as f64 / *r.denom() as f64 == omega_d_over_omega_i);
    let mu = match exact {
        Some(r) => {
            let mu = r.recip() * 2 - Ratio::from_integer(2 * k);
            *mu.numer() as f64 / *mu.denom() as f64
        }
        None => 2.0 / omega_d_over_omega_i - 2.0 * k as f64,
    };
    if !(mu > 0.0 && mu < 2.0) {
        return domain(format!("resonant exponent {mu} for k = {k} lies outside (0, 2)"));
    }
    Ok(mu)
}

/// Finds the drive that puts an ion at `w_i' = w_d / omega_d_over_omega_i`
/// on sideband `k` of an electron with parameter `Q` in the given tongue.
pub fn locate_working_point(
    omega_d_over_omega_i: f64,
    q: f64,
    k: i64,
    tongue: Tongue,
    mass_ratio: f64,
) -> Result<WorkingPoint> {
    let mu = resonant_mu(omega_d_over_omega_i, k)?;
    let params = inverse_solve_a(mu, q, tongue)?;
    let sol = solve_floquet(params, None)?;
    let r_k = d_factor(&sol, k)? * mass_ratio.sqrt();
    let ratio_e_d = params.a.sqrt() / 2.0;
    Ok(WorkingPoint {
        mu,
        a: params.a,
        q,
        eta_prime: -2.0 * q / params.a,
        omega_e_over_omega_d: ratio_e_d,
        omega_e_over_omega_i: ratio_e_d * omega_d_over_omega_i,
        k,
        r_k,
    })
}

/// Two points on one `eta'` column with equal exponent, the second at
/// higher `w_e'/w_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPair {
    pub eta_prime: f64,
    pub mu: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub r0_low: f64,
    pub r0_high: f64,
}

impl TrendPair {
    pub fn declines(&self) -> bool {
        self.r0_high <= self.r0_low
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub pairs: Vec<TrendPair>,
}

impl TrendReport {
    pub fn fraction_declining(&self) -> Option<f64> {
        let n = self.pairs.len();
        (n > 0).then(|| self.pairs.iter().filter(|p| p.declines()).count() as f64 / n as f64)
    }

    pub fn violations(&self) -> impl Iterator<Item = &TrendPair> {
        self.pairs.iter().filter(|p| !p.declines())
    }
}

/// Compares `R_0` between successive tongues at matched `mu` along columns
/// of fixed `eta'`. Crossings of each `mu` are located by scanning
/// `ratios` and bisecting inside stable stretches.
pub fn trend_probe(etas: &[f64], mus: &[f64], ratios: &AxisRange, mass_ratio: f64) -> Result<TrendReport> {
    ratios.validate()?;
    let grid: Vec<f64> = ratios.values();
    let columns: Vec<Vec<TrendPair>> = etas
        .par_iter()
        .map(|&eta| {
            let cells: Vec<SweepCell> = grid.iter().map(|&r| sweep_cell(eta, r, 0, mass_ratio)).collect();
            let mut pairs = Vec::new();
            for &mu in mus {
                let mut hits: Vec<(f64, f64)> = Vec::new();
                for w in cells.windows(2) {
                    let (Some(m0), Some(m1)) = (w[0].mu, w[1].mu) else { continue };
                    if (m0 - mu) * (m1 - mu) > 0.0 || (m0 - m1).abs() > 0.5 {
                        continue;
                    }
                    if let Some(hit) = bisect_mu(eta, mu, w[0].ratio, w[1].ratio, m0, mass_ratio) {
                        hits.push(hit);
                    }
                }
                for h in hits.windows(2) {
                    pairs.push(TrendPair {
                        eta_prime: eta,
                        mu,
                        ratio_low: h[0].0,
                        ratio_high: h[1].0,
                        r0_low: h[0].1,
                        r0_high: h[1].1,
                    });
                }
            }
            pairs
        })
        .collect();
    Ok(TrendReport { pairs: columns.into_iter().flatten().collect() })
}

fn bisect_mu(eta: f64, mu: f64, mut lo: f64, mut hi: f64, mu_lo: f64, mass_ratio: f64) -> Option<(f64, f64)> {
    let below_at_lo = mu_lo < mu;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let c = sweep_cell(eta, mid, 0, mass_ratio);
        let m = c.mu?;
        if (m < mu) == below_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = sweep_cell(eta, 0.5 * (lo + hi), 0, mass_ratio);
    Some((0.5 * (lo + hi), c.r_k?))
}
