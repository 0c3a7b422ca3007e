//! Finite-conductivity correction series in the relative penetration depth
//! `r = delta_0 / a`, up to fourth order, for both geometries:
//!
//! ```text
//! F / F^(0) = 1 + c1 r + c2 r^2 + c3 r^3 + c4 r^4
//! ```
//!
//! The sphere-plate coefficients follow from the plate ones through the
//! proximity-force relation: integrating `r^k / a^4` over the separation
//! gives `c_k(sphere) = 3 / (3 + k) * c_k(plates)`.

use std::f64::consts::PI;

use thiserror::Error;

pub const MAX_ORDER: usize = 4;

/// Ratio above which a separation is smaller than the plasma wavelength
/// (`a < lambda_p`), i.e. `1 / (2 pi)`.
pub const PLASMA_WAVELENGTH_RATIO: f64 = 1.0 / (2.0 * PI);

/// Ratio beyond which the series is not meaningful at all.
pub const ABSURD_RATIO: f64 = 0.5;

/// Third- and fourth-order sphere-plate coefficients of the older
/// interpolation formula.
pub const INTERPOLATION_C3: f64 = -50.67;
pub const INTERPOLATION_C4: f64 = 177.33;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series order must be in 0..={MAX_ORDER}, got {0}")]
    Order(usize),
    #[error("ratio delta_0/a must be finite and >= 0, got {0}")]
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Plates,
    Sphere,
}

impl GeometryKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Plates => "plates",
            Self::Sphere => "sphere",
        }
    }
}

impl std::fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Coefficients `c1..c4` of one geometry; `c[k-1]` multiplies `r^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCoefficients {
    pub geometry: GeometryKind,
    pub c: [f64; 4],
}

/// `1 - pi^2/210`
fn third_order_bracket() -> f64 {
    1.0 - PI * PI / 210.0
}

/// `1 - 163 pi^2 / 7350`
fn fourth_order_bracket() -> f64 {
    1.0 - 163.0 * PI * PI / 7350.0
}

/// Exact closed-form coefficients.
pub fn series_coefficients(geometry: GeometryKind) -> SeriesCoefficients {
    let c = match geometry {
        GeometryKind::Plates => [
            -16.0 / 3.0,
            24.0,
            -(640.0 / 7.0) * third_order_bracket(),
            (2800.0 / 9.0) * fourth_order_bracket(),
        ],
        GeometryKind::Sphere => [
            -4.0,
            72.0 / 5.0,
            -(320.0 / 7.0) * third_order_bracket(),
            (400.0 / 3.0) * fourth_order_bracket(),
        ],
    };
    SeriesCoefficients { geometry, c }
}

impl SeriesCoefficients {
    /// `1 + sum_{k <= order} c_k r^k`, Horner form.
    pub fn evaluate(&self, ratio: f64, order: usize) -> f64 {
        let order = order.min(MAX_ORDER);
        let mut acc = 0.0;
        for k in (1..=order).rev() {
            acc = (acc + self.c[k - 1]) * ratio;
        }
        1.0 + acc
    }
}

/// How far a ratio lies from the region where the series applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Validity {
    /// `a >= lambda_p`.
    Valid,
    /// `a < lambda_p`: the series visibly departs from exact results.
    BelowPlasmaWavelength,
    /// `delta_0/a > 0.5`.
    FarOutside,
}

impl Validity {
    pub fn of_ratio(ratio: f64) -> Self {
        if ratio > ABSURD_RATIO {
            Self::FarOutside
        } else if ratio > PLASMA_WAVELENGTH_RATIO * (1.0 + 1e-12) {
            Self::BelowPlasmaWavelength
        } else {
            Self::Valid
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Valid => "ok",
            Self::BelowPlasmaWavelength => "a<lambda_p",
            Self::FarOutside => "ratio>0.5",
        }
    }
}

/// Series value with its validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesFactor {
    pub value: f64,
    pub validity: Validity,
}

impl SeriesFactor {
    /// Set when `delta_0/a > 0.5`.
    pub fn warning(&self) -> bool {
        self.validity == Validity::FarOutside
    }
}

pub fn correction_factor_series(
    geometry: GeometryKind,
    ratio: f64,
    order: usize,
) -> Result<SeriesFactor, SeriesError> {
    if order > MAX_ORDER {
        return Err(SeriesError::Order(order));
    }
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(SeriesError::Ratio(ratio));
    }
    Ok(SeriesFactor {
        value: series_coefficients(geometry).evaluate(ratio, order),
        validity: Validity::of_ratio(ratio),
    })
}

/// `|c_k(sphere) - 3/(3+k) c_k(plates)|` for `k = 1..4`.
pub fn pft_order_consistency() -> Vec<(usize, f64)> {
    pft_residuals(
        &series_coefficients(GeometryKind::Plates),
        &series_coefficients(GeometryKind::Sphere),
    )
}

/// Residuals for an arbitrary pair of coefficient sets.
pub fn pft_residuals(plates: &SeriesCoefficients, sphere: &SeriesCoefficients) -> Vec<(usize, f64)> {
    (1..=MAX_ORDER)
        .map(|k| {
            let predicted = 3.0 / (3.0 + k as f64) * plates.c[k - 1];
            (k, (sphere.c[k - 1] - predicted).abs())
        })
        .collect()
}

/// Difference in the sphere-plate correction factor between the fourth-order
/// series and the same series with the interpolation formula's third- and
/// fourth-order coefficients, in units of the perfect-conductor force.
pub fn interpolation_comparison(ratio: f64) -> Result<f64, SeriesError> {
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(SeriesError::Ratio(ratio));
    }
    let c = series_coefficients(GeometryKind::Sphere).c;
    let r3 = ratio.powi(3);
    Ok(((INTERPOLATION_C3 - c[2]) * r3 + (INTERPOLATION_C4 - c[3]) * r3 * ratio).abs())
}
