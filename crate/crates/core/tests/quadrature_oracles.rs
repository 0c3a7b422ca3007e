use std::f64::consts::PI;

use casimir_core::quadrature::{integrate_1d, integrate_2d, QuadratureSettings, Upper};
use proptest::prelude::*;

/// Midpoint Riemann sum on `[0, upper]` with `n` cells.
fn riemann(f: impl Fn(f64) -> f64, upper: f64, n: usize) -> f64 {
    let h = upper / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn planck4(x: f64) -> f64 {
    let em = x.exp_m1();
    x.powi(4) * (em + 1.0) / (em * em)
}

#[test]
fn planck_derivative_family_against_riemann_sum() {
    let oracle = riemann(planck4, 80.0, 4_000_000);
    let closed = 4.0 * PI.powi(4) / 15.0;
    // The oracle itself is independent of the engine; check it first.
    assert!(
        (oracle / closed - 1.0).abs() < 1e-9,
        "oracle {oracle} vs {closed}"
    );

    let est = integrate_1d(planck4, 0.0, Upper::Infinity, &QuadratureSettings::default()).unwrap();
    assert!((est.value - oracle).abs() <= 1e-8 * oracle, "{est:?} vs {oracle}");
    assert!((est.value - closed).abs() <= 1e-8 * closed);
}

#[test]
fn planck_integral_closed_form() {
    let est = integrate_1d(
        |x: f64| x.powi(3) / x.exp_m1(),
        0.0,
        Upper::Infinity,
        &QuadratureSettings::default(),
    )
    .unwrap();
    assert!((est.value - 6.493_939_402_266_829).abs() < 1e-10);
}

#[test]
fn separable_two_dimensional_family() {
    let s = QuadratureSettings::default();
    let est = integrate_2d(|x, p| x.powi(3) / (p * p * x.exp_m1()), &s).unwrap();
    assert!((est.value - PI.powi(4) / 15.0).abs() < 1e-8 * est.value);
    assert!(est.error >= 0.0);
    assert!(est.evaluations > 0);
}

/// Test family with known integrals over `[0, inf)`.
fn family(k: usize) -> (fn(f64) -> f64, f64) {
    match k % 4 {
        0 => (|x: f64| x.powi(3) / x.exp_m1(), PI.powi(4) / 15.0),
        1 => (planck4, 4.0 * PI.powi(4) / 15.0),
        2 => (|x: f64| (-x).exp(), 1.0),
        _ => (|x: f64| x * x * (-2.0 * x).exp(), 0.25),
    }
}

#[test]
fn error_estimate_covers_actual_error() {
    // Deterministic sweep over tolerances; at least 95% must be bounded.
    let mut covered = 0;
    let mut total = 0;
    for k in 0..4 {
        let (f, exact) = family(k);
        for i in 0..25 {
            let rel_tol = 10f64.powf(-3.0 - 9.0 * i as f64 / 24.0);
            let s = QuadratureSettings {
                rel_tol,
                abs_tol: 1e-15,
                ..Default::default()
            };
            let est = integrate_1d(f, 0.0, Upper::Infinity, &s).unwrap();
            total += 1;
            if (est.value - exact).abs() <= est.error.max(4.0 * f64::EPSILON * exact) {
                covered += 1;
            }
        }
    }
    assert!(covered * 100 >= 95 * total, "{covered}/{total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linearity(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, k in 0usize..4, j in 0usize..4) {
        let s = QuadratureSettings::default();
        let (f, _) = family(k);
        let (g, _) = family(j);
        let combined = integrate_1d(|x| alpha * f(x) + beta * g(x), 0.0, Upper::Infinity, &s).unwrap();
        let fi = integrate_1d(f, 0.0, Upper::Infinity, &s).unwrap();
        let gi = integrate_1d(g, 0.0, Upper::Infinity, &s).unwrap();
        let expected = alpha * fi.value + beta * gi.value;
        let tol = combined.error + alpha.abs() * fi.error + beta.abs() * gi.error + 1e-12;
        prop_assert!((combined.value - expected).abs() <= tol);
    }

    #[test]
    fn random_tolerances_meet_target(exp in 3.0f64..11.0, k in 0usize..4) {
        let (f, exact) = family(k);
        let s = QuadratureSettings { rel_tol: 10f64.powf(-exp), abs_tol: 1e-14, ..Default::default() };
        let est = integrate_1d(f, 0.0, Upper::Infinity, &s).unwrap();
        prop_assert!((est.value - exact).abs() <= s.abs_tol.max(s.rel_tol * est.value.abs()) * 1.0001);
    }
}
