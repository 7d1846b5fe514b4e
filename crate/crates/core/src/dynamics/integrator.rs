//! Adaptive extrapolation integrator for second-order systems `x'' = f(t, x)`.
//!
//! Each macro step runs Störmer's two-step rule with the substep counts
//! 2, 4, ..., 2k and extrapolates the results to zero substep size with
//! Aitken-Neville in `h^2` (Gragg-Bulirsch-Stoer). The diagonal entry of the
//! extrapolation table is of order `2k`; the entry one column to the left is
//! the embedded order `2k - 2` estimate that drives step-size control. All
//! coefficients are small rationals, so the scheme runs unchanged in any
//! [`Real`] type.
//!
//! Systems with a periodic forcing term report its angular rate through
//! [`NystromSystem::drive_rate`]; the integrator then supplies
//! `(cos, sin)` of the drive phase at every substep, obtained by rotating the
//! phase at the start of the step rather than by one trig call per
//! evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Second-order system in Nyström form.
pub trait NystromSystem<T: Real> {
    fn dim(&self) -> usize;

    /// Angular rate of the periodic forcing, if any.
    fn drive_rate(&self) -> Option<T> {
        None
    }

    /// Writes `x''` into `out`. `drive` is `(cos, sin)` of `drive_rate * t`,
    /// or `(1, 0)` for unforced systems.
    fn accel(&self, t: T, drive: (T, T), x: &[T], out: &mut [T]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    #[default]
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Order of the extrapolated solution; even, between 8 and 20.
    pub method_order: u32,
    pub precision: Precision,
    /// Upper bound on accepted plus rejected steps per call.
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            method_order: 12,
            precision: Precision::Extended,
            max_steps: 2_000_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn double(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, precision: Precision::Double, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(v > 0.0 && v <= 1e-6) {
                return domain(format!("{name} must lie in (0, 1e-6], got {v}"));
            }
        }
        if !self.method_order.is_multiple_of(2) || !(8..=20).contains(&self.method_order) {
            return domain(format!("method_order must be even and in [8, 20], got {}", self.method_order));
        }
        if self.max_steps == 0 {
            return domain("max_steps must be positive");
        }
        Ok(())
    }

    /// Human-readable name of the scheme actually used.
    pub fn method_name(&self) -> String {
        let k = self.method_order / 2;
        format!(
            "GBS-Stormer extrapolation, order {}({}), substeps 2..{}",
            self.method_order,
            self.method_order - 2,
            2 * k
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Reusable integrator state: tolerances, work buffers and the step-size
/// proposal carried between calls.
pub struct Extrapolator<T: Real> {
    atol: T,
    rtol: T,
    max_steps: u64,
    seq: Vec<usize>,
    dim: usize,
    // Extrapolation rows, each holding (x, v) concatenated.
    prev_row: Vec<Vec<T>>,
    row: Vec<Vec<T>>,
    a0: Vec<T>,
    f: Vec<T>,
    y: Vec<T>,
    delta: Vec<T>,
    h: Option<T>,
    pub stats: StepStats,
}

impl<T: Real> Extrapolator<T> {
    pub fn new(cfg: &IntegratorConfig, dim: usize) -> Result<Self> {
        cfg.validate()?;
        let k = (cfg.method_order / 2) as usize;
        let seq: Vec<usize> = (1..=k).map(|j| 2 * j).collect();
        let blank = || vec![vec![T::zero(); 2 * dim]; k];
        Ok(Self {
            atol: T::lit(cfg.abs_tol),
            rtol: T::lit(cfg.rel_tol),
            max_steps: cfg.max_steps,
            seq,
            dim,
            prev_row: blank(),
            row: blank(),
            a0: vec![T::zero(); dim],
            f: vec![T::zero(); dim],
            y: vec![T::zero(); dim],
            delta: vec![T::zero(); dim],
            h: None,
            stats: StepStats::default(),
        })
    }

    /// Current step-size proposal, if a step has been taken.
    pub fn step_proposal(&self) -> Option<T> {
        self.h
    }

    /// Integrates from `*t` to exactly `t_target` (either direction), updating
    /// `t`, `x` and `v` in place.
    pub fn advance<S: NystromSystem<T>>(
        &mut self,
        sys: &S,
        t: &mut T,
        x: &mut [T],
        v: &mut [T],
        t_target: T,
    ) -> Result<()> {
        assert_eq!(x.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        if t_target == *t {
            return Ok(());
        }
        let forward = t_target > *t;
        let dir = if forward { T::one() } else { -T::one() };
        let mut h_abs = match self.h {
            Some(h) => h.abs(),
            None => self.initial_step(sys, *t, x),
        };
        let mut x_new = vec![T::zero(); self.dim];
        let mut v_new = vec![T::zero(); self.dim];
        let k = self.seq.len();
        let exponent = 1.0 / (2 * k - 1) as f64;
        let mut steps = 0u64;

        while *t != t_target {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Numerical(format!(
                    "exceeded {} steps before reaching t = {:e}",
                    self.max_steps,
                    t_target.approx()
                )));
            }
            let remaining = (t_target - *t).abs();
            let clipped = h_abs >= remaining;
            let h_try = if clipped { remaining } else { h_abs };
            let err = self.step(sys, *t, x, v, h_try * dir, &mut x_new, &mut v_new);
            let e = err.approx();
            let fac = if e == 0.0 { 4.0 } else { (0.9 * e.powf(-exponent)).clamp(0.2, 4.0) };
            if e.is_finite() && e <= 1.0 {
                self.stats.accepted += 1;
                *t = if clipped { t_target } else { *t + h_try * dir };
                x.copy_from_slice(&x_new);
                v.copy_from_slice(&v_new);
                let proposal = h_try * T::lit(fac);
                h_abs = if clipped { proposal.max(h_abs) } else { proposal };
            } else {
                self.stats.rejected += 1;
                h_abs = h_try * T::lit(if e.is_finite() { fac.min(0.5) } else { 0.2 });
                let scale = t.abs().max(t_target.abs()).max(T::one());
                if h_abs <= scale * T::epsilon() * T::lit(16.0) {
                    return Err(Error::StepUnderflow { t: t.approx(), h: h_abs.approx() });
                }
            }
        }
        self.h = Some(h_abs);
        Ok(())
    }

    fn initial_step<S: NystromSystem<T>>(&mut self, sys: &S, t: T, x: &[T]) -> T {
        let drive = match sys.drive_rate() {
            Some(w) => (w * t).sin_cos(),
            None => (T::zero(), T::one()),
        };
        sys.accel(t, (drive.1, drive.0), x, &mut self.a0);
        self.stats.evaluations += 1;
        let mut xn = T::zero();
        let mut an = T::zero();
        for i in 0..self.dim {
            xn = xn.max(x[i].abs());
            an = an.max(self.a0[i].abs());
        }
        let mut h = if xn > T::zero() && an > T::zero() {
            T::lit(0.1) * (xn / an).sqrt()
        } else {
            T::lit(1e-3)
        };
        if let Some(w) = sys.drive_rate() {
            if w != T::zero() {
                h = h.min(T::lit(0.1) / w.abs());
            }
        }
        h
    }

    #[allow(clippy::too_many_arguments)]
    fn step<S: NystromSystem<T>>(
        &mut self,
        sys: &S,
        t: T,
        x: &[T],
        v: &[T],
        h: T,
        x_out: &mut [T],
        v_out: &mut [T],
    ) -> T {
        let dim = self.dim;
        let rate = sys.drive_rate();
        let (s0, c0) = match rate {
            Some(w) => (w * t).sin_cos(),
            None => (T::zero(), T::one()),
        };
        sys.accel(t, (c0, s0), x, &mut self.a0);
        self.stats.evaluations += 1;
        let half = T::lit(0.5);

        std::mem::swap(&mut self.prev_row, &mut self.row);
        for j in 0..self.seq.len() {
            let n = self.seq[j];
            let hs = h / T::lit(n as f64);
            let (sr, cr) = match rate {
                Some(w) => (w * hs).sin_cos(),
                None => (T::zero(), T::one()),
            };
            let (mut c, mut s) = (c0, s0);
            for i in 0..dim {
                self.delta[i] = hs * (v[i] + half * hs * self.a0[i]);
                self.y[i] = x[i] + self.delta[i];
            }
            let h2 = hs * hs;
            for m in 1..=n {
                let cn = c * cr - s * sr;
                s = s * cr + c * sr;
                c = cn;
                let tm = t + hs * T::lit(m as f64);
                sys.accel(tm, (c, s), &self.y, &mut self.f);
                if m < n {
                    for i in 0..dim {
                        self.delta[i] += h2 * self.f[i];
                        self.y[i] += self.delta[i];
                    }
                }
            }
            self.stats.evaluations += n as u64;

            // Column 0 of row j.
            {
                let cell = &mut self.row[0];
                for i in 0..dim {
                    cell[i] = self.y[i];
                    cell[dim + i] = self.delta[i] / hs + half * hs * self.f[i];
                }
            }
            // Neville: row[l] = row[l-1] + (row[l-1] - prev[l-1]) / ((n_j/n_{j-l})^2 - 1)
            for l in 1..=j {
                let ratio = n as f64 / self.seq[j - l] as f64;
                let denom = T::lit(ratio * ratio - 1.0);
                let (lo, hi) = self.row.split_at_mut(l);
                let left = &lo[l - 1];
                let up = &self.prev_row[l - 1];
                let dst = &mut hi[0];
                for i in 0..2 * dim {
                    dst[i] = left[i] + (left[i] - up[i]) / denom;
                }
            }
            if j + 1 < self.seq.len() {
                std::mem::swap(&mut self.prev_row, &mut self.row);
            }
        }

        let k = self.seq.len();
        let best = &self.row[k - 1];
        let lower = &self.row[k - 2];
        let mut err = T::zero();
        for i in 0..2 * dim {
            let old = if i < dim { x[i] } else { v[i - dim] };
            let scale = self.atol + self.rtol * old.abs().max(best[i].abs());
            err = err.max((best[i] - lower[i]).abs() / scale);
        }
        x_out.copy_from_slice(&best[..dim]);
        v_out.copy_from_slice(&best[dim..]);
        err
    }
}

/// One sampled point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub x: Vec<T>,
    pub v: Vec<T>,
}

/// Integrates from `t0` and records the state at each of `times` (which must
/// be monotone in the direction of integration). Steps are clipped so that
/// every sample instant is hit exactly.
pub fn integrate_samples<T: Real, S: NystromSystem<T>>(
    sys: &S,
    t0: T,
    x0: &[T],
    v0: &[T],
    times: &[T],
    cfg: &IntegratorConfig,
) -> Result<(Vec<Sample<T>>, StepStats)> {
    let mut ex = Extrapolator::new(cfg, sys.dim())?;
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        ex.advance(sys, &mut t, &mut x, &mut v, target)?;
        out.push(Sample { t, x: x.clone(), v: v.clone() });
    }
    Ok((out, ex.stats))
}
