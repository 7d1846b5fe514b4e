//! Long-horizon propagation through the one-period map.
//!
//! The equations of motion are linear with coefficients of period
//! `2 pi / w_d`, so the state after `n` whole periods is `Phi^n y_0` where
//! `Phi` is the 6x6 map obtained by integrating the unit vectors over one
//! period. Powers are applied by binary decomposition of `n`; only the
//! fractional period before each sample is integrated directly.

use super::classical::{EomCoefficients, MotionState, ScaledEom, Units};
use super::integrator::{Extrapolator, IntegratorConfig, StepStats};
use crate::error::{domain, Result};
use crate::scalar::Real;

type Matrix<T> = [[T; 6]; 6];

pub struct PeriodPropagator<T: Real> {
    sys: ScaledEom<T>,
    units: Units,
    period: T,
    /// `Phi^(2^j)`.
    powers: Vec<Matrix<T>>,
    stepper: Extrapolator<T>,
}

impl<T: Real> PeriodPropagator<T> {
    pub fn new(c: &EomCoefficients, cfg: &IntegratorConfig) -> Result<Self> {
        let sys = c.scaled::<T>();
        let period = sys.period();
        let mut stepper = Extrapolator::new(cfg, 3)?;
        let mut phi = [[T::zero(); 6]; 6];
        for col in 0..6 {
            let mut y = [T::zero(); 6];
            y[col] = T::one();
            let (mut x, mut v) = split(&y);
            let mut t = T::zero();
            stepper.advance(&sys, &mut t, &mut x, &mut v, period)?;
            for row in 0..3 {
                phi[row][col] = x[row];
                phi[row + 3][col] = v[row];
            }
        }
        Ok(Self { sys, units: Units::new(c), period, powers: vec![phi], stepper })
    }

    /// The one-period map acting on `(x, v)` in scaled units.
    pub fn matrix(&self) -> &Matrix<T> {
        &self.powers[0]
    }

    pub fn stats(&self) -> StepStats {
        self.stepper.stats
    }

    fn apply_periods(&mut self, y: &mut [T; 6], mut n: u64) {
        let mut j = 0;
        while n > 0 {
            if j == self.powers.len() {
                let last = self.powers[j - 1];
                self.powers.push(mat_mul(&last, &last));
            }
            if n & 1 == 1 {
                *y = mat_vec(&self.powers[j], y);
            }
            n >>= 1;
            j += 1;
        }
    }

    fn integrate(&mut self, t: &mut T, y: &mut [T; 6], target: T) -> Result<()> {
        let (mut x, mut v) = split(y);
        self.stepper.advance(&self.sys, t, &mut x, &mut v, target)?;
        *y = join(&x, &v);
        Ok(())
    }

    /// States at each of `times` (seconds, ascending, not before `init.t`).
    pub fn propagate(&mut self, init: &MotionState<T>, times: &[f64]) -> Result<Vec<MotionState<T>>> {
        if !init.is_finite() {
            return domain("initial state must be finite");
        }
        let (t0, x0, v0) = self.units.scale_state(init);
        let y0 = join(&x0, &v0);
        let periods_at = |tau: T, period: T| {
            let n = (tau / period).approx().floor().max(0.0) as u64;
            let start = period * T::lit(n as f64);
            if start > tau && n > 0 {
                n - 1
            } else {
                n
            }
        };
        // Align to the first whole period at or after t0.
        let mut n_cur = periods_at(t0, self.period);
        let mut t_align = self.period * T::lit(n_cur as f64);
        let mut y_align = y0;
        if t_align < t0 {
            n_cur += 1;
            t_align = self.period * T::lit(n_cur as f64);
            let mut t = t0;
            self.integrate(&mut t, &mut y_align, t_align)?;
        }
        let mut out = Vec::with_capacity(times.len());
        let mut last = t0;
        for &ts in times {
            let tau = self.units.time_to_scaled(T::lit(ts));
            if tau < last {
                return domain("sample times must be ascending and not before the initial time");
            }
            last = tau;
            let (mut t, mut y) = if tau < t_align {
                (t0, y0)
            } else {
                let n = periods_at(tau, self.period).max(n_cur);
                self.apply_periods(&mut y_align, n - n_cur);
                n_cur = n;
                t_align = self.period * T::lit(n as f64);
                (t_align, y_align)
            };
            self.integrate(&mut t, &mut y, tau)?;
            out.push(self.units.unscale_state(t, &y[..3], &y[3..]));
        }
        Ok(out)
    }
}

/// Propagates the equations of motion to each of `times` through the
/// one-period map.
pub fn propagate_periodic<T: Real>(
    c: &EomCoefficients,
    init: &MotionState<T>,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<MotionState<T>>> {
    PeriodPropagator::new(c, cfg)?.propagate(init, times)
}

fn split<T: Real>(y: &[T; 6]) -> ([T; 3], [T; 3]) {
    ([y[0], y[1], y[2]], [y[3], y[4], y[5]])
}

fn join<T: Real>(x: &[T], v: &[T]) -> [T; 6] {
    [x[0], x[1], x[2], v[0], v[1], v[2]]
}

fn mat_vec<T: Real>(m: &Matrix<T>, y: &[T; 6]) -> [T; 6] {
    std::array::from_fn(|i| (0..6).fold(T::zero(), |acc, j| acc + m[i][j] * y[j]))
}

fn mat_mul<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..6).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j])))
}
