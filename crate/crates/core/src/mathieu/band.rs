//! The symmetric tridiagonal matrix `M(mu)` with diagonal `(mu + 2k)^2` and
//! constant off-diagonal `Q`, for `k` in `[-K, K]`.
//!
//! `A` is an eigenvalue of `M(mu)` exactly when the Mathieu equation with
//! parameters `(A, Q)` has a Floquet solution with exponent `mu`. For `mu` in
//! `[0, 1]` the `j`-th eigenvalue is monotone in `mu`, so its values at
//! `mu = 0` and `mu = 1` are the edges of the `j`-th stability band.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BandMatrix {
    pub mu: f64,
    pub q: f64,
    pub k_max: usize,
}

impl BandMatrix {
    pub fn new(mu: f64, q: f64, k_max: usize) -> Self {
        Self { mu, q, k_max }
    }

    pub fn size(&self) -> usize {
        2 * self.k_max + 1
    }

    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        let s = self.mu + 2.0 * (i as f64 - self.k_max as f64);
        s * s
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let q2 = self.q * self.q;
        let pivmin = f64::MIN_POSITIVE * q2.max(1.0) * 1e4;
        let mut count = 0;
        let mut p = 1.0;
        for i in 0..self.size() {
            let d = self.diag(i) - x;
            let mut piv = if i == 0 { d } else { d - q2 / p };
            if piv.abs() < pivmin {
                piv = -pivmin;
            }
            if piv < 0.0 {
                count += 1;
            }
            p = piv;
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.q.abs();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.size() {
            let d = self.diag(i);
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue (0-based), by bisection on the Sturm count.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) <= j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue close to `shift`, by inverse iteration
    /// with a pivoted tridiagonal LU. Normalized to unit 2-norm.
    pub fn eigenvector(&self, shift: f64) -> Vec<f64> {
        let n = self.size();
        let lu = TriLu::factor(
            vec![self.q; n - 1],
            (0..n).map(|i| self.diag(i) - shift).collect(),
            vec![self.q; n - 1],
        );
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
        for _ in 0..3 {
            lu.solve(&mut x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                break;
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}

/// Tridiagonal LU factorization with partial pivoting (the `gttrf` layout).
pub(crate) struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    pub fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Self {
        let n = d.len();
        let scale = d
            .iter()
            .chain(dl.iter())
            .chain(du.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let tiny = scale * f64::EPSILON * 1e-3;
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
