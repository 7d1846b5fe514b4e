//! Monte-Carlo exchange cooling: random initial phases and trap detunings,
//! one classical trajectory per draw, and temperature statistics per
//! sample time.
//!
//! Trajectory `j` draws from a ChaCha8 stream selected by `(master_seed, j)`,
//! in the order `phi_P`, `phi_e`, `d_omega_e`, `d_omega_P`, so results do not
//! depend on scheduling or worker count.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    initial_state_from_temperatures, integrate_at, propagate_periodic, IntegratorConfig, MotionState, Temperatures,
    TriSystem,
};
use crate::error::{domain, Error, Result};
use crate::mathieu::FloquetSolution;

/// Largest tolerated fraction of failed trajectories.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// How the detuning draws modify `w_e'` and `w_P'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DetuningMode {
    /// `w -> w + d`, with `delta_omega_std` in rad/s.
    #[default]
    Additive,
    /// `w -> w (1 + d)`, with `delta_omega_std` dimensionless.
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Whole drive periods through the one-period map, the remainder by
    /// direct integration.
    #[default]
    PeriodMap,
    /// Direct integration over the full horizon.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub delta_omega_std: f64,
    pub master_seed: u64,
    /// Initial temperatures, K.
    pub temperatures: Temperatures,
    /// Sample times, s, ascending.
    pub sample_times: Vec<f64>,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub detuning: DetuningMode,
    #[serde(default)]
    pub propagation: Propagation,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return domain("ensemble needs at least one trajectory");
        }
        if !(self.delta_omega_std >= 0.0 && self.delta_omega_std.is_finite()) {
            return domain(format!("detuning spread must be non-negative, got {}", self.delta_omega_std));
        }
        if self.sample_times.is_empty() {
            return domain("ensemble needs at least one sample time");
        }
        if self.sample_times.iter().any(|t| !(*t >= 0.0 && t.is_finite()))
            || self.sample_times.windows(2).any(|w| w[1] < w[0])
        {
            return domain("sample times must be finite, non-negative and ascending");
        }
        self.integrator.validate()
    }
}

/// `n + 1` evenly spaced times from 0 to `t_end`.
pub fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { t_end } else { t_end * i as f64 / n as f64 }).collect()
}

/// Random inputs of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDraw {
    pub phi_p: f64,
    pub phi_e: f64,
    pub d_omega_e: f64,
    pub d_omega_p: f64,
}

impl TrajectoryDraw {
    pub fn sample(master_seed: u64, index: u64, std: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        let phi_p = 2.0 * PI * rng.random::<f64>();
        let phi_e = 2.0 * PI * rng.random::<f64>();
        let d_omega_e = std * rng.sample::<f64, _>(StandardNormal);
        let d_omega_p = std * rng.sample::<f64, _>(StandardNormal);
        Self { phi_p, phi_e, d_omega_e, d_omega_p }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub draw: TrajectoryDraw,
    /// `T_P` at each sample time, K, or the failure message.
    pub t_p: std::result::Result<Vec<f64>, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub t: f64,
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
    pub n_ok: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub sample_times: Vec<f64>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub aggregates: Vec<Aggregate>,
    pub n_failed: usize,
}

impl EnsembleResult {
    /// `T_P` of every successful trajectory at sample `i`.
    pub fn values_at(&self, i: usize) -> Vec<f64> {
        self.trajectories.iter().filter_map(|r| r.t_p.as_ref().ok().map(|v| v[i])).collect()
    }
}

/// `t_ex = pi / sqrt(g1^2 + g2^2)`.
pub fn exchange_time(g1: f64, g2: f64) -> Result<f64> {
    let g = g1.hypot(g2);
    if !(g > 0.0 && g.is_finite()) {
        return domain("exchange time needs a nonzero coupling");
    }
    Ok(PI / g)
}

/// Nearest-rank `p`-th percentile of sorted values.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Mean and nearest-rank 5th and 95th percentiles.
pub fn aggregate(t: f64, values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return domain("cannot aggregate an empty sample");
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(Aggregate { t, mean, p5: nearest_rank(&sorted, 5.0), p95: nearest_rank(&sorted, 95.0), n_ok: values.len() })
}

/// Runs one trajectory of the ensemble.
pub fn run_trajectory(
    cfg: &EnsembleConfig,
    sys: &TriSystem,
    sol: &FloquetSolution,
    draw: &TrajectoryDraw,
) -> Result<Vec<f64>> {
    let nominal = sys.coefficients();
    let init = initial_state_from_temperatures(cfg.temperatures, draw.phi_p, draw.phi_e, sol, &nominal)?;
    let (we, wp) = (nominal.omega_e, nominal.omega_p);
    let c = match cfg.detuning {
        DetuningMode::Additive => nominal.with_frequencies(we + draw.d_omega_e, wp + draw.d_omega_p),
        DetuningMode::Multiplicative => nominal.with_frequencies(we * (1.0 + draw.d_omega_e), wp * (1.0 + draw.d_omega_p)),
    };
    if !(c.omega_e > 0.0 && c.omega_p > 0.0) {
        return domain("detuned trap frequency is not positive");
    }
    let states: Vec<MotionState<f64>> = match cfg.propagation {
        Propagation::PeriodMap => propagate_periodic(&c, &init, &cfg.sample_times, &cfg.integrator)?,
        Propagation::Direct => integrate_at(&c, &init, &cfg.sample_times, &cfg.integrator)?.0,
    };
    let t_p: Vec<f64> = states.iter().map(|s| c.temperatures(s).2).collect();
    if t_p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite proton temperature".into()));
    }
    Ok(t_p)
}

/// Runs `cfg.n_traj` trajectories in parallel and aggregates `T_P` per
/// sample time. Fails if more than 1% of the trajectories fail.
pub fn run_ensemble(cfg: &EnsembleConfig, sys: &TriSystem, sol: &FloquetSolution) -> Result<EnsembleResult> {
    cfg.validate()?;
    if !sol.stable {
        return domain("ensemble needs a stable Floquet solution for the nominal drive");
    }
    let trajectories: Vec<TrajectoryRecord> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|j| {
            let draw = TrajectoryDraw::sample(cfg.master_seed, j as u64, cfg.delta_omega_std);
            let t_p = run_trajectory(cfg, sys, sol, &draw).map_err(|e| e.to_string());
            TrajectoryRecord { index: j, draw, t_p }
        })
        .collect();
    let n_failed = trajectories.iter().filter(|r| r.t_p.is_err()).count();
    if n_failed as f64 > MAX_FAILURE_FRACTION * cfg.n_traj as f64 {
        let first = trajectories.iter().find_map(|r| r.t_p.as_ref().err()).cloned().unwrap_or_default();
        return Err(Error::Numerical(format!("{n_failed} of {} trajectories failed; first: {first}", cfg.n_traj)));
    }
    let mut result = EnsembleResult { sample_times: cfg.sample_times.clone(), trajectories, aggregates: vec![], n_failed };
    result.aggregates = (0..cfg.sample_times.len())
        .map(|i| aggregate(cfg.sample_times[i], &result.values_at(i)))
        .collect::<Result<_>>()?;
    Ok(result)
}

#[derive(Serialize)]
struct SummaryRow {
    t: f64,
    #[serde(rename = "mean_TP")]
    mean: f64,
    #[serde(rename = "p5_TP")]
    p5: f64,
    #[serde(rename = "p95_TP")]
    p95: f64,
    n_ok: usize,
}

/// Writes `t,mean_TP,p5_TP,p95_TP,n_ok`.
pub fn write_summary_csv<W: Write>(result: &EnsembleResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for a in &result.aggregates {
        w.serialize(SummaryRow { t: a.t, mean: a.mean, p5: a.p5, p95: a.p95, n_ok: a.n_ok })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryCsvRow {
    traj: usize,
    t: f64,
    #[serde(rename = "TP")]
    t_p: f64,
}

/// Writes `traj,t,TP` for every successful trajectory.
pub fn write_trajectories_csv<W: Write>(result: &EnsembleResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &result.trajectories {
        if let Ok(values) = &r.t_p {
            for (t, t_p) in result.sample_times.iter().zip(values) {
                w.serialize(TrajectoryCsvRow { traj: r.index, t: *t, t_p: *t_p })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
