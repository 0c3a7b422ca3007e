//! Cross-checks between the exact integrals and the correction series.
//!
//! [`extract_coefficients`] fits the exact plasma-model correction factor on
//! small `delta_0/a` with a quartic without constant term and recovers the
//! series coefficients numerically. [`compare_series_vs_exact`] tabulates
//! exact, fourth-order and second-order factors over a separation grid.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::dielectric::{DielectricModel, PlasmaModel};
use crate::lifshitz::{force_sphere_exact, pressure_plates_exact, LifshitzError};
use crate::perturbation::{series_coefficients, GeometryKind, SeriesCoefficients, Validity, MAX_ORDER};
use crate::quadrature::QuadratureSettings;

/// Largest ratio accepted by the coefficient fit.
pub const MAX_FIT_RATIO: f64 = 0.02;
pub const MIN_FIT_POINTS: usize = 8;

/// Separation used when only `delta_0/a` matters, m.
const REFERENCE_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("exact factor at delta_0/a = {ratio}: {source}")]
    Exact {
        ratio: f64,
        #[source]
        source: LifshitzError,
    },
    #[error("normal equations are ill-conditioned ({0}); use a wider grid")]
    IllConditioned(String),
    #[error("the series needs a plasma wavelength; tabulated models have none")]
    NoPenetrationDepth,
}

/// Least-squares estimate of `c1..c4`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub geometry: GeometryKind,
    pub coefficients: [f64; 4],
    /// One standard deviation per coefficient.
    pub uncertainties: [f64; 4],
    /// `(delta_0/a, exact factor)` pairs used in the fit.
    pub samples: Vec<(f64, f64)>,
    /// Euclidean norm of the fit residuals.
    pub residual_norm: f64,
}

impl FitReport {
    /// `|c_hat_k / c_k - 1|` against the closed-form coefficients.
    pub fn relative_deviations(&self) -> [f64; 4] {
        let exact = series_coefficients(self.geometry).c;
        std::array::from_fn(|k| (self.coefficients[k] / exact[k] - 1.0).abs())
    }
}

/// `n` log-spaced ratios on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

fn check_fit_grid(grid: &[f64]) -> Result<(), AnalysisError> {
    if grid.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::Grid(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AnalysisError::Grid("ratios must be strictly increasing".into()));
    }
    if !(grid[0] > 0.0) || !(grid[grid.len() - 1] <= MAX_FIT_RATIO) {
        return Err(AnalysisError::Grid(format!(
            "ratios must lie in (0, {MAX_FIT_RATIO}]"
        )));
    }
    Ok(())
}

/// Exact correction factor of a plasma-model metal at a given `delta_0/a`.
pub fn exact_factor_at_ratio(
    geometry: GeometryKind,
    ratio: f64,
    settings: &QuadratureSettings,
) -> Result<f64, LifshitzError> {
    let a = REFERENCE_SEPARATION;
    let model = PlasmaModel::new(2.0 * std::f64::consts::PI * ratio * a).map(DielectricModel::Plasma)?;
    let result = match geometry {
        GeometryKind::Plates => pressure_plates_exact(&model, a, settings)?,
        GeometryKind::Sphere => force_sphere_exact(&model, a, 1e3 * a, settings)?,
    };
    Ok(result.correction_factor)
}

/// Fits the exact plasma-model factor on `grid` (values of `delta_0/a`).
pub fn extract_coefficients(
    geometry: GeometryKind,
    grid: &[f64],
    settings: &QuadratureSettings,
) -> Result<FitReport, AnalysisError> {
    check_fit_grid(grid)?;
    let samples = grid
        .par_iter()
        .map(|&ratio| {
            exact_factor_at_ratio(geometry, ratio, settings)
                .map(|f| (ratio, f))
                .map_err(|source| AnalysisError::Exact { ratio, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    fit_correction_series(geometry, samples)
}

/// Ordinary least squares of `factor - 1` on `{r, r^2, r^3, r^4}`.
///
/// Columns are scaled by the largest ratio before solving; uncertainties
/// come from the diagonal of the inverse normal matrix times the residual
/// variance.
pub fn fit_correction_series(
    geometry: GeometryKind,
    samples: Vec<(f64, f64)>,
) -> Result<FitReport, AnalysisError> {
    let n = samples.len();
    if n <= MAX_ORDER {
        return Err(AnalysisError::Grid(format!(
            "need more than {MAX_ORDER} samples, got {n}"
        )));
    }
    let scale = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(AnalysisError::Grid("ratios must be positive and finite".into()));
    }
    let design = DMatrix::from_fn(n, MAX_ORDER, |i, k| (samples[i].0 / scale).powi(k as i32 + 1));
    let target = DVector::from_iterator(n, samples.iter().map(|s| s.1 - 1.0));

    let normal = design.transpose() * &design;
    let inverse = normal
        .clone()
        .cholesky()
        .ok_or_else(|| AnalysisError::IllConditioned("normal matrix not positive definite".into()))?
        .inverse();
    let rcond = 1.0 / (normal.norm() * inverse.norm());
    if !(rcond > 1e-13) {
        return Err(AnalysisError::IllConditioned(format!(
            "reciprocal condition number {rcond:.1e}"
        )));
    }
    // QR on the design matrix avoids squaring its condition number.
    let qr = design.clone().qr();
    let solution = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &target))
        .ok_or_else(|| AnalysisError::IllConditioned("rank-deficient design matrix".into()))?;
    let residuals = &target - &design * &solution;
    let rss = residuals.norm_squared();
    let variance = rss / (n - MAX_ORDER) as f64;

    let coefficients = std::array::from_fn(|k| solution[k] / scale.powi(k as i32 + 1));
    let uncertainties =
        std::array::from_fn(|k| (variance * inverse[(k, k)]).sqrt() / scale.powi(k as i32 + 1));

    Ok(FitReport {
        geometry,
        coefficients,
        uncertainties,
        samples,
        residual_norm: rss.sqrt(),
    })
}

/// One separation of a series-versus-exact sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    /// Separation, m.
    pub separation: f64,
    pub ratio: f64,
    /// `None` when the exact integral failed; see `failure`.
    pub exact: Option<f64>,
    pub order4: f64,
    pub order2: f64,
    pub validity: Validity,
    pub failure: Option<String>,
}

impl ComparisonRow {
    pub fn dev4(&self) -> Option<f64> {
        self.exact.map(|e| (self.order4 - e).abs())
    }

    pub fn dev2(&self) -> Option<f64> {
        self.exact.map(|e| (self.order2 - e).abs())
    }
}

/// Exact and series factors over an increasing separation grid (meters).
///
/// A failing exact integral does not stop the sweep; the row carries the
/// error message instead.
pub fn compare_series_vs_exact(
    model: &DielectricModel,
    geometry: GeometryKind,
    separations: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<ComparisonRow>, AnalysisError> {
    let depth = model
        .penetration_depth()
        .ok_or(AnalysisError::NoPenetrationDepth)?;
    if separations.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(AnalysisError::Grid("separations must be positive".into()));
    }
    if separations.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AnalysisError::Grid(
            "separations must be strictly increasing".into(),
        ));
    }
    let coefficients = series_coefficients(geometry);
    Ok(separations
        .par_iter()
        .map(|&a| comparison_row(model, geometry, &coefficients, depth, a, settings))
        .collect())
}

fn comparison_row(
    model: &DielectricModel,
    geometry: GeometryKind,
    coefficients: &SeriesCoefficients,
    depth: f64,
    a: f64,
    settings: &QuadratureSettings,
) -> ComparisonRow {
    let ratio = depth / a;
    let exact = match geometry {
        GeometryKind::Plates => pressure_plates_exact(model, a, settings),
        GeometryKind::Sphere => force_sphere_exact(model, a, 1e3 * a, settings),
    };
    let (exact, failure) = match exact {
        Ok(r) => (Some(r.correction_factor), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ComparisonRow {
        separation: a,
        ratio,
        exact,
        order4: coefficients.evaluate(ratio, 4),
        order2: coefficients.evaluate(ratio, 2),
        validity: Validity::of_ratio(ratio),
        failure,
    }
}
