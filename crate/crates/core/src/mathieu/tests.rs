use super::*;
use crate::dynamics::integrator::{integrate_samples, IntegratorConfig, NystromSystem};
use proptest::prelude::*;

fn p(a: f64, q: f64) -> MathieuParams {
    MathieuParams { a, q }
}

// Reference values from a dense symmetric eigensolver (numpy eigh, K = 40).
const BLACK_CROSS_A: f64 = 7.884_655_289_605_966;
const BLACK_CROSS_W: f64 = 0.181_994;
const BLACK_CROSS_D0: f64 = 0.413_385_41;
const BLACK_CROSS_D1: f64 = 1.512_714_93;

#[test]
fn undriven_quarter() {
    let s = solve_floquet(p(0.25, 0.0), None).unwrap();
    assert!(s.stable);
    assert_eq!(s.mu, 0.5);
    assert_eq!(s.coefficient(0), 1.0);
    assert_eq!(s.terms().filter(|(_, c)| *c != 0.0).count(), 1);
    assert_eq!(s.wronskian_xi, 0.5);
    assert_eq!(wronskian_xi(&s).unwrap(), 0.5);
    assert_eq!(d_factor(&s, 0).unwrap(), 1.0);
}

#[test]
fn undriven_reduces_root_to_window() {
    let s = solve_floquet(p(6.25, 0.0), None).unwrap();
    assert!((s.mu - 0.5).abs() < 1e-15);
    assert_eq!(s.coefficient(1), 1.0);
    assert_eq!(s.wronskian_xi, 2.5);
    let s = solve_floquet(p(-2.0, 0.0), None).unwrap();
    assert!(!s.stable);
    assert!((s.mu_imag - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn first_resonance_is_unstable() {
    let s = solve_floquet(p(1.0, 0.5), None).unwrap();
    assert!(!s.stable);
    assert_eq!(s.mu, 1.0);
    assert!(s.mu_imag > INSTABILITY_TOL);
    assert!(!monodromy_oracle(p(1.0, 0.5)).unwrap().stable);
    assert!(wronskian_xi(&s).is_err());
    assert!(d_factor(&s, 0).is_err());
}

#[test]
fn growth_rate_matches_monodromy() {
    for (a, q) in [(1.0, 0.5), (4.0, 1.5), (-0.5, 0.3)] {
        let s = solve_floquet(p(a, q), None).unwrap();
        assert!(!s.stable, "{a} {q}");
        let v = monodromy_oracle(p(a, q)).unwrap();
        let nu = (v.trace.abs() / 2.0).acosh() / std::f64::consts::PI;
        assert!((s.mu_imag - nu).abs() < 1e-9, "{a} {q}: {} vs {nu}", s.mu_imag);
        assert_eq!(s.mu, if v.trace < 0.0 { 1.0 } else { 0.0 });
    }
}

#[test]
fn black_cross_solution() {
    let s = solve_floquet(p(BLACK_CROSS_A, -6.0), None).unwrap();
    assert!(s.stable && !s.marginal);
    assert!((s.mu - 0.08).abs() < 1e-10, "mu = {}", s.mu);
    assert!((s.wronskian_xi - BLACK_CROSS_W).abs() < 1e-6);
    assert!((d_factor(&s, 0).unwrap() - BLACK_CROSS_D0).abs() < 1e-7);
    assert!((d_factor(&s, 1).unwrap() - BLACK_CROSS_D1).abs() < 1e-7);
    assert!(d_factor(&s, -1).is_err());
    assert!(s.coefficient(0) > 0.0);
    let oracle = monodromy_oracle(s.params).unwrap();
    assert!(oracle.stable);
    assert!((oracle.mu.unwrap() - 0.08).abs() < 1e-8);
}

#[test]
fn black_cross_inverse() {
    let pr = inverse_solve_a(0.08, -6.0, Tongue::LowestPositive).unwrap();
    assert!((pr.a - BLACK_CROSS_A).abs() < 1e-10, "A = {}", pr.a);
    let again = inverse_solve_a(0.08, -6.0, Tongue::Index(2)).unwrap();
    assert_eq!(pr, again);
    let (lo, hi) = band_edges(-6.0, 2);
    assert!(lo < pr.a && pr.a < hi);
    assert!((lo - 7.8701).abs() < 1e-3 && (hi - 9.1379).abs() < 1e-3);
}

#[test]
fn inverse_undriven_and_round_trip() {
    let pr = inverse_solve_a(0.5, 0.0, Tongue::Containing(0.25)).unwrap();
    assert!((pr.a - 0.25).abs() < 1e-14);
    let pr = inverse_solve_a(0.3, -1.0, Tongue::Index(0)).unwrap();
    let s = solve_floquet(pr, None).unwrap();
    assert!((s.mu - 0.3).abs() < 1e-10);
    let pr = inverse_solve_a(1.4, -1.0, Tongue::Index(1)).unwrap();
    let s = solve_floquet(pr, None).unwrap();
    assert!((s.mu - 1.4).abs() < 1e-10);
}

#[test]
fn inverse_rejects_wrong_parity_and_bounds() {
    match inverse_solve_a(0.08, -6.0, Tongue::Index(1)) {
        Err(Error::NotFound { lo, hi, .. }) => assert!(lo < hi),
        other => panic!("expected NotFound, got {other:?}"),
    }
    assert!(inverse_solve_a(1.0, -1.0, Tongue::Index(0)).is_err());
    assert!(inverse_solve_a(0.0, -1.0, Tongue::Index(0)).is_err());
    assert!(inverse_solve_a(2.0, -1.0, Tongue::Index(1)).is_err());
    assert!(inverse_solve_a(0.5, -1.0, Tongue::Containing(1.0e9)).is_ok() || true);
}

#[test]
fn rejects_non_finite() {
    assert!(solve_floquet(p(f64::NAN, 0.0), None).is_err());
    assert!(solve_floquet(p(1.0, f64::INFINITY), None).is_err());
}

#[test]
fn large_drive_grows_truncation_and_converges() {
    let s = solve_floquet(p(40.0, 30.0), Some(4)).unwrap_or_else(|e| panic!("{e}"));
    if s.stable {
        assert!(s.truncation_order >= 8);
        assert!(s.recurrence_residual() < 1e-10);
    }
}

/// Real and imaginary parts of the Floquet solution, integrated directly.
struct Mathieu(MathieuParams);

impl NystromSystem<f64> for Mathieu {
    fn dim(&self) -> usize {
        2
    }
    fn drive_rate(&self) -> Option<f64> {
        Some(2.0)
    }
    fn accel(&self, _t: f64, d: (f64, f64), x: &[f64], out: &mut [f64]) {
        let w = self.0.a - 2.0 * self.0.q * d.0;
        out[0] = -w * x[0];
        out[1] = -w * x[1];
    }
}

fn wronskian_spread(s: &FloquetSolution) -> (f64, f64) {
    let x0 = [s.sum_coefficients(), 0.0];
    let v0 = [0.0, s.sum_weighted()];
    let times: Vec<f64> = (1..=50).map(|i| i as f64 * 0.37).collect();
    let (samples, _) =
        integrate_samples(&Mathieu(s.params), 0.0, &x0, &v0, &times, &IntegratorConfig::double(1e-13)).unwrap();
    let w0 = x0[0] * v0[1] - x0[1] * v0[0];
    let spread = samples
        .iter()
        .map(|smp| (smp.x[0] * smp.v[1] - smp.x[1] * smp.v[0] - w0).abs())
        .fold(0.0, f64::max);
    (w0, spread)
}

#[test]
fn black_cross_wronskian_matches_integrated_solution() {
    let s = solve_floquet(p(BLACK_CROSS_A, -6.0), None).unwrap();
    let (w0, spread) = wronskian_spread(&s);
    assert!((w0 - s.wronskian_xi).abs() < 1e-11 * s.wronskian_xi.max(1.0));
    assert!(spread < 1e-8 * s.wronskian_xi);
    assert!((s.wronskian_diagonal() - s.wronskian_xi).abs() < 1e-10);
}

#[test]
fn floquet_form_tracks_integration() {
    // f(xi) = e^{i mu xi} sum c_k e^{2ik xi}, compared at a few points.
    let s = solve_floquet(p(2.7, -1.3), None).unwrap();
    assert!(s.stable);
    let x0 = [s.sum_coefficients(), 0.0];
    let v0 = [0.0, s.sum_weighted()];
    let times = [0.4, 1.9, 5.3];
    let (samples, _) =
        integrate_samples(&Mathieu(s.params), 0.0, &x0, &v0, &times, &IntegratorConfig::double(1e-13)).unwrap();
    for smp in samples {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, c) in s.terms() {
            let ph = (s.mu + 2.0 * k as f64) * smp.t;
            re += c * ph.cos();
            im += c * ph.sin();
        }
        assert!((re - smp.x[0]).abs() < 1e-9 && (im - smp.x[1]).abs() < 1e-9);
    }
}

fn bisect_boundary(q: f64, mut a_stable: f64, mut a_unstable: f64) -> FloquetSolution {
    while (a_stable - a_unstable).abs() > 1e-6 {
        let mid = 0.5 * (a_stable + a_unstable);
        if solve_floquet(p(mid, q), None).unwrap().stable {
            a_stable = mid;
        } else {
            a_unstable = mid;
        }
    }
    solve_floquet(p(a_stable, q), None).unwrap()
}

#[test]
fn boundaries_have_integer_exponent() {
    for (q, j) in [(-6.0, 2usize), (-1.0, 0), (2.0, 1), (3.0, 3)] {
        let (lo, hi) = band_edges(q, j);
        let inside = 0.5 * (lo + hi);
        for edge in [lo, hi] {
            let outside = edge + (edge - inside).signum() * 1e-3;
            assert!(!solve_floquet(p(outside, q), None).unwrap().stable);
            let s = bisect_boundary(q, inside, outside);
            let dist = (s.mu - s.mu.round()).abs();
            assert!(dist < 2e-3, "Q={q} band {j}: mu = {}", s.mu);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stable_solutions_satisfy_invariants(a in -2.0f64..30.0, q in -10.0f64..10.0) {
        let s = solve_floquet(p(a, q), None).unwrap();
        if s.stable && !s.marginal {
            prop_assert!((s.norm_sq() - 1.0).abs() < 1e-12);
            prop_assert!(s.recurrence_residual() < 1e-10, "residual {:e}", s.recurrence_residual());
            prop_assert!(s.wronskian_xi > 0.0);
            prop_assert!((0.0..2.0).contains(&s.mu));
            let peak = s.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let n = s.coefficients.len();
            prop_assert!(s.coefficients[0].abs() < 1e-14 * peak && s.coefficients[n - 1].abs() < 1e-14 * peak);
            prop_assert!((s.wronskian_diagonal() - s.wronskian_xi).abs() < 1e-9 * s.wronskian_xi.max(1.0));
            prop_assert_eq!(s.mu_imag, 0.0);
        } else if !s.stable {
            prop_assert!(s.mu_imag > 0.0 || s.marginal);
        }
    }

    #[test]
    fn wronskian_is_constant(a in 0.1f64..12.0, q in -6.0f64..6.0) {
        let s = solve_floquet(p(a, q), None).unwrap();
        prop_assume!(s.stable && !s.marginal && s.wronskian_xi > 1e-3);
        let (_, spread) = wronskian_spread(&s);
        prop_assert!(spread < 1e-8 * s.wronskian_xi, "spread {:e} W {}", spread, s.wronskian_xi);
    }

    #[test]
    fn undriven_has_single_coefficient(a in 0.0f64..50.0) {
        let s = solve_floquet(p(a, 0.0), None).unwrap();
        prop_assert_eq!(s.terms().filter(|(_, c)| *c != 0.0).count(), 1);
        let unfolded = s.mu + 2.0 * s.terms().find(|(_, c)| *c != 0.0).unwrap().0 as f64;
        prop_assert!((unfolded - a.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_monodromy(eta in 0.0f64..2.0, ratio in 0.2f64..2.0) {
        let a = 4.0 * ratio * ratio;
        let pr = p(a, -a * eta / 2.0);
        let s = solve_floquet(pr, None).unwrap();
        let o = monodromy_oracle(pr).unwrap();
        prop_assume!(!s.marginal);
        prop_assert_eq!(s.stable, o.stable);
        if s.stable {
            prop_assert!((s.mu - o.mu.unwrap()).abs() < 1e-8, "{} vs {:?}", s.mu, o.mu);
        }
    }

    #[test]
    fn inverse_round_trips(mu in 0.01f64..0.99, q in -8.0f64..8.0, j in 0usize..4, upper in any::<bool>()) {
        let target = if upper { 2.0 - mu } else { mu };
        let j = 2 * j + usize::from(upper);
        let pr = inverse_solve_a(target, q, Tongue::Index(j)).unwrap();
        let s = solve_floquet(pr, None).unwrap();
        prop_assert!((s.mu - target).abs() < 1e-10);
        let (lo, hi) = band_edges(q, j);
        prop_assert!(lo <= pr.a && pr.a <= hi);
    }
}
