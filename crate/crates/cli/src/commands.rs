//! The five run modes. Each returns the full report text; the caller decides
//! where it goes.

use std::fmt::Write as _;

use casimir_core::analysis::{log_grid, MAX_FIT_RATIO, MIN_FIT_POINTS};
use casimir_core::perturbation::pft_residuals;
use casimir_core::{
    compare_series_vs_exact, correction_factor_series, extract_coefficients, force_exact, force_sphere_exact,
    force_sphere_log_form, series_coefficients, GeometryKind, LifshitzError, SeriesCoefficients,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::CliError;

/// Text of a finished run plus the number of rows or checks that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub failures: usize,
}

fn unit(geometry: GeometryKind) -> &'static str {
    match geometry {
        GeometryKind::Plates => "Pa",
        GeometryKind::Sphere => "N",
    }
}

/// Keeps messages inside a single CSV field.
fn csv_safe(message: &str) -> String {
    message.replace([',', '\n'], ";")
}

/// One line per separation: `a_um=... value=... unit=... factor=... error=...`.
pub fn cmd_force(config: &RunConfig) -> Result<Report, CliError> {
    let results: Vec<_> = config
        .separations
        .par_iter()
        .map(|&a| force_exact(&config.model, config.geometry_at(a), &config.settings))
        .collect();
    let mut text = String::new();
    for (a_um, result) in config.separations_um.iter().zip(results) {
        let r = result.map_err(|e| CliError::Computation(format!("a = {a_um} um: {e}")))?;
        let _ = writeln!(
            text,
            "a_um={a_um} value={:.6e} unit={} factor={:.8} error={:.2e}",
            r.value,
            unit(config.geometry),
            r.correction_factor,
            r.error
        );
    }
    Ok(Report { text, failures: 0 })
}

/// CSV of the exact factor and the series of the configured order.
pub fn cmd_factor(config: &RunConfig) -> Result<Report, CliError> {
    let depth = config.model.penetration_depth();
    let results: Vec<_> = config
        .separations
        .par_iter()
        .map(|&a| force_exact(&config.model, config.geometry_at(a), &config.settings))
        .collect();
    let mut text = config.metadata();
    let order = config.order;
    let _ = writeln!(text, "a_um,delta0_over_a,factor_exact,factor_order{order},warn");
    let mut failures = 0;
    for ((&a, a_um), result) in config.separations.iter().zip(&config.separations_um).zip(results) {
        let (ratio, series, mut warn) = match depth {
            Some(d) => {
                let s = correction_factor_series(config.geometry, d / a, order)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                (
                    format!("{}", d / a),
                    format!("{:.10}", s.value),
                    s.validity.label().to_string(),
                )
            }
            None => (String::new(), String::new(), "no-series".to_string()),
        };
        let exact = match result {
            Ok(r) => format!("{:.10}", r.correction_factor),
            Err(e) => {
                failures += 1;
                warn = format!("failed: {}", csv_safe(&e.to_string()));
                String::new()
            }
        };
        let _ = writeln!(text, "{a_um},{ratio},{exact},{series},{warn}");
    }
    Ok(Report { text, failures })
}

/// Series-versus-exact CSV.
pub fn cmd_compare(config: &RunConfig) -> Result<Report, CliError> {
    let rows = compare_series_vs_exact(
        &config.model,
        config.geometry,
        &config.separations,
        &config.settings,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = config.metadata();
    let _ = writeln!(
        text,
        "a_um,factor_exact,factor_order4,factor_order2,dev4,dev2,warn"
    );
    let mut failures = 0;
    for (row, a_um) in rows.iter().zip(&config.separations_um) {
        let fmt = |v: Option<f64>, precision: usize| match v {
            Some(v) if precision == 0 => format!("{v:.3e}"),
            Some(v) => format!("{v:.precision$}"),
            None => String::new(),
        };
        let warn = match &row.failure {
            Some(message) => {
                failures += 1;
                format!("failed: {}", csv_safe(message))
            }
            None => row.validity.label().to_string(),
        };
        let _ = writeln!(
            text,
            "{a_um},{},{:.10},{:.10},{},{},{warn}",
            fmt(row.exact, 10),
            row.order4,
            row.order2,
            fmt(row.dev4(), 0),
            fmt(row.dev2(), 0),
        );
    }
    Ok(Report { text, failures })
}

/// Fitted coefficients next to the closed forms.
pub fn cmd_fit(config: &RunConfig) -> Result<Report, CliError> {
    let fit = extract_coefficients(config.geometry, &config.fit_ratios, &config.settings)
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let exact = series_coefficients(config.geometry).c;
    let deviations = fit.relative_deviations();
    let mut text = config.metadata();
    let _ = writeln!(text, "# residual_norm={:.3e}", fit.residual_norm);
    let _ = writeln!(text, "k,fitted,uncertainty,closed_form,rel_dev");
    for k in 0..4 {
        let _ = writeln!(
            text,
            "{},{:.8},{:.3e},{:.8},{:.3e}",
            k + 1,
            fit.coefficients[k],
            fit.uncertainties[k],
            exact[k],
            deviations[k]
        );
    }
    Ok(Report { text, failures: 0 })
}

/// Relative tolerances of the coefficient fit, by order.
pub const FIT_TOLERANCES: [f64; 4] = [0.01, 0.02, 0.10, 0.25];

/// Separations (um) at which the two sphere routes are compared.
pub const ROUTE_SAMPLE_UM: [f64; 3] = [0.1, 0.7, 5.0];

fn expected_coefficients(config: &RunConfig) -> (SeriesCoefficients, SeriesCoefficients) {
    let mut plates = series_coefficients(GeometryKind::Plates);
    if let Some(c3) = config.inject_c3 {
        plates.c[2] = c3;
    }
    (plates, series_coefficients(GeometryKind::Sphere))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// PASS/FAIL report: proximity-force consistency of the coefficients,
/// agreement of the two sphere-force routes, and coefficient extraction.
pub fn cmd_verify(config: &RunConfig) -> Result<Report, CliError> {
    let mut text = config.metadata();
    let mut failures = 0;
    let mut record = |text: &mut String, pass: bool, line: String| {
        if !pass {
            failures += 1;
        }
        let _ = writeln!(text, "{} {line}", verdict(pass));
    };

    let (plates, sphere) = expected_coefficients(config);
    for (k, residual) in pft_residuals(&plates, &sphere) {
        let relative = residual / sphere.c[k - 1].abs();
        record(
            &mut text,
            relative <= 1e-14,
            format!("pft-consistency k={k} rel_residual={relative:.3e}"),
        );
    }

    let radius = config.radius;
    let routes: Vec<_> = ROUTE_SAMPLE_UM
        .par_iter()
        .map(|&a_um| -> Result<_, LifshitzError> {
            let a = a_um * 1e-6;
            let derivative = force_sphere_exact(&config.model, a, radius, &config.settings)?;
            let log = force_sphere_log_form(&config.model, a, radius, &config.settings)?;
            Ok((a_um, derivative, log))
        })
        .collect();
    for route in routes {
        match route {
            Ok((a_um, derivative, log)) => {
                let diff = (derivative.value - log.value).abs();
                let tol = 10.0 * (derivative.error + log.error) + 1e-15 * derivative.value.abs();
                record(
                    &mut text,
                    diff <= tol,
                    format!("route-agreement a_um={a_um} diff={diff:.3e} tol={tol:.3e}"),
                );
            }
            Err(e) => record(&mut text, false, format!("route-agreement error: {e}")),
        }
    }

    let grid = log_grid(0.002, MAX_FIT_RATIO, MIN_FIT_POINTS);
    for (geometry, expected) in [(GeometryKind::Plates, plates), (GeometryKind::Sphere, sphere)] {
        match extract_coefficients(geometry, &grid, &config.settings) {
            Ok(fit) => {
                for (k, tol) in FIT_TOLERANCES.iter().enumerate() {
                    let (fitted, want) = (fit.coefficients[k], expected.c[k]);
                    let dev = ((fitted - want) / want).abs();
                    record(
                        &mut text,
                        dev <= *tol,
                        format!(
                            "fit {geometry} c{} fitted={fitted:.6} expected={want:.6} rel_dev={dev:.3e} tol={tol}",
                            k + 1
                        ),
                    );
                }
            }
            Err(e) => record(&mut text, false, format!("fit {geometry} error: {e}")),
        }
    }
    Ok(Report { text, failures })
}
