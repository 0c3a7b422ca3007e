use casimir_core::analysis::{exact_factor_at_ratio, log_grid};
use casimir_core::perturbation::{Validity, PLASMA_WAVELENGTH_RATIO};
use casimir_core::{
    compare_series_vs_exact, correction_factor_series, extract_coefficients, series_coefficients,
    DielectricModel, GeometryKind, QuadratureSettings,
};

const GEOMETRIES: [GeometryKind; 2] = [GeometryKind::Plates, GeometryKind::Sphere];

#[test]
fn partial_sums_bracket_exact_factor() {
    let s = QuadratureSettings::default();
    for g in GEOMETRIES {
        let c = series_coefficients(g);
        for r in log_grid(0.002, 0.05, 12) {
            let exact = exact_factor_at_ratio(g, r, &s).unwrap();
            for order in 0..=4 {
                let d = c.evaluate(r, order) - exact;
                if order % 2 == 0 {
                    assert!(d > 0.0, "{g} r={r} order {order}: {d}");
                } else {
                    assert!(d < 0.0, "{g} r={r} order {order}: {d}");
                }
            }
        }
    }
}

#[test]
fn fourth_order_beats_second_order() {
    let s = QuadratureSettings::default();
    for g in GEOMETRIES {
        let c = series_coefficients(g);
        for r in log_grid(0.003, 0.16, 20) {
            let exact = exact_factor_at_ratio(g, r, &s).unwrap();
            let d4 = (c.evaluate(r, 4) - exact).abs();
            let d2 = (c.evaluate(r, 2) - exact).abs();
            assert!(d4 <= d2, "{g} r={r}: {d4} > {d2}");
        }
    }
}

#[test]
fn series_agreement_range() {
    // Measured: |order4 - exact| <= 0.01 holds up to r = 0.119 for plates
    // and r = 0.145 for the sphere; at a = lambda_p it is 0.041 and 0.016.
    let s = QuadratureSettings::default();
    for (g, limit) in [(GeometryKind::Plates, 0.119), (GeometryKind::Sphere, 0.145)] {
        let c = series_coefficients(g);
        for r in log_grid(0.002, limit, 15) {
            let exact = exact_factor_at_ratio(g, r, &s).unwrap();
            assert!((c.evaluate(r, 4) - exact).abs() <= 0.01, "{g} r={r}");
        }
        let at_lambda = exact_factor_at_ratio(g, PLASMA_WAVELENGTH_RATIO, &s).unwrap();
        assert!((c.evaluate(PLASMA_WAVELENGTH_RATIO, 4) - at_lambda).abs() > 0.01);
    }
}

#[test]
fn coefficient_extraction_recovers_closed_forms() {
    let s = QuadratureSettings::default();
    let grid = log_grid(0.002, 0.02, 8);
    for g in GEOMETRIES {
        let fit = extract_coefficients(g, &grid, &s).unwrap();
        let dev = fit.relative_deviations();
        assert!(dev[0] < 0.01, "{g} c1 {dev:?}");
        assert!(dev[1] < 0.02, "{g} c2 {dev:?}");
        assert!(dev[2] < 0.10, "{g} c3 {dev:?}");
        assert!(dev[3] < 0.25, "{g} c4 {dev:?}");
        assert!(fit.residual_norm.is_finite());
        assert_eq!(fit.samples.len(), 8);
        assert!(fit.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }
}

#[test]
fn fit_is_stable_under_tighter_quadrature() {
    let grid = log_grid(0.002, 0.02, 8);
    let base = QuadratureSettings::default();
    let tight = base.tightened(2.0);
    for g in GEOMETRIES {
        let a = extract_coefficients(g, &grid, &base).unwrap();
        let b = extract_coefficients(g, &grid, &tight).unwrap();
        assert!(
            (a.coefficients[0] - b.coefficients[0]).abs() < a.uncertainties[0],
            "{g}: {} vs {} (unc {})",
            a.coefficients[0],
            b.coefficients[0],
            a.uncertainties[0]
        );
    }
}

#[test]
fn comparison_rows_for_aluminium_plates() {
    let s = QuadratureSettings::default();
    let al = DielectricModel::plasma_nm(98.0).unwrap();
    let rows = compare_series_vs_exact(&al, GeometryKind::Plates, &[0.1e-6, 0.5e-6, 3e-6], &s).unwrap();
    let expected = [0.56, 0.85, 0.97];
    for (row, want) in rows.iter().zip(expected) {
        // Series values are 0.5652, 0.8546, 0.9729.
        assert!((row.order4 - want).abs() < 0.006, "{row:?}");
        let exact = row.exact.unwrap();
        assert!(exact > 0.0 && exact <= 1.05);
        assert_eq!(row.validity, Validity::Valid);
    }
    assert!(rows[1].dev4().unwrap() < 0.01);
    assert!(rows[2].dev4().unwrap() < 0.01);
}

#[test]
fn copper_gold_below_plasma_wavelength_is_flagged() {
    let s = QuadratureSettings::default();
    let cu = DielectricModel::plasma_nm(132.0).unwrap();
    let rows = compare_series_vs_exact(&cu, GeometryKind::Plates, &[0.1e-6, 0.5e-6], &s).unwrap();
    assert!((rows[0].order4 - 0.60).abs() < 0.005);
    assert_eq!(rows[0].validity, Validity::BelowPlasmaWavelength);
    assert_eq!(rows[1].validity, Validity::Valid);
    assert!(!correction_factor_series(GeometryKind::Plates, rows[0].ratio, 4)
        .unwrap()
        .warning());
}

#[test]
fn comparison_is_deterministic() {
    let s = QuadratureSettings::default();
    let m = DielectricModel::plasma_nm(132.0).unwrap();
    let grid = log_grid(0.2e-6, 4e-6, 7);
    let a = compare_series_vs_exact(&m, GeometryKind::Sphere, &grid, &s).unwrap();
    let b = compare_series_vs_exact(&m, GeometryKind::Sphere, &grid, &s).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
