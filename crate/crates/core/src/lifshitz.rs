//! Exact Casimir pressure, energy density and sphere-plate force between two
//! identical metal half-spaces, evaluated from `eps(i xi)` in the
//! dimensionless variables
//!
//! ```text
//! k^2 = (xi/c)^2 (p^2 - 1),   xi = c x / (2 p a),   s = sqrt(eps - 1 + p^2)
//! ```
//!
//! Every integrand is written as the perfect-conductor integrand minus a
//! "deficit" that vanishes for `eps -> inf`. The deficit is built from
//! `1 - r^2` in algebraic form, so the correction `1 - factor` keeps full
//! relative accuracy even when it is tiny. The p axis is integrated in
//! `t = 1/p`, under which `dp/p^2 = dt`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::{HBAR_C, SPEED_OF_LIGHT};
use crate::dielectric::{DielectricError, DielectricModel};
use crate::quadrature::{integrate_2d_compact, IntegralEstimate, QuadratureError, QuadratureSettings};

/// `integral_0^inf x^3 / (e^x - 1) dx` summed over both polarizations.
const PLATE_IDEAL_INTEGRAL: f64 = 2.0 * PI * PI * PI * PI / 15.0;

/// `-integral_0^inf x^2 ln(1 - e^-x) dx` summed over both polarizations.
const ENERGY_IDEAL_INTEGRAL: f64 = 2.0 * PI * PI * PI * PI / 45.0;

/// Default lower bound on `R/a` for the proximity-force relation.
pub const DEFAULT_MIN_RADIUS_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifshitzError {
    #[error("separation must be positive and finite, got {0} m")]
    InvalidSeparation(f64),
    #[error("sphere radius must be positive and finite, got {0} m")]
    InvalidRadius(f64),
    #[error("permittivity must be >= 1, got {0}")]
    PermittivityBelowOne(f64),
    #[error("momentum variable p must be >= 1, got {0}")]
    MomentumBelowOne(f64),
    #[error(transparent)]
    Dielectric(#[from] DielectricError),
    #[error("{what} at a = {separation:e} m: {source}")]
    Quadrature {
        what: &'static str,
        separation: f64,
        #[source]
        source: QuadratureError,
    },
}

/// Interaction geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    PlatesGap { separation: f64 },
    SpherePlate { separation: f64, radius: f64 },
}

/// Non-fatal conditions reported alongside a valid geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryWarning {
    /// `R/a` below the configured minimum; the proximity-force relation
    /// loses accuracy.
    SmallRadiusRatio { ratio: f64, minimum: f64 },
}

impl std::fmt::Display for GeometryWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SmallRadiusRatio { ratio, minimum } => write!(
                f,
                "R/a = {ratio:.3} is below {minimum}; proximity-force result is unreliable"
            ),
        }
    }
}

impl Geometry {
    pub fn separation(&self) -> f64 {
        match *self {
            Self::PlatesGap { separation } | Self::SpherePlate { separation, .. } => separation,
        }
    }

    pub fn with_separation(self, separation: f64) -> Self {
        match self {
            Self::PlatesGap { .. } => Self::PlatesGap { separation },
            Self::SpherePlate { radius, .. } => Self::SpherePlate { separation, radius },
        }
    }

    /// Checks positivity; returns a warning when `R/a < min_radius_ratio`.
    pub fn validate(&self, min_radius_ratio: f64) -> Result<Option<GeometryWarning>, LifshitzError> {
        check_separation(self.separation())?;
        if let Self::SpherePlate { separation, radius } = *self {
            check_radius(radius)?;
            let ratio = radius / separation;
            if ratio < min_radius_ratio {
                return Ok(Some(GeometryWarning::SmallRadiusRatio {
                    ratio,
                    minimum: min_radius_ratio,
                }));
            }
        }
        Ok(None)
    }
}

fn check_separation(a: f64) -> Result<(), LifshitzError> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(LifshitzError::InvalidSeparation(a))
    }
}

fn check_radius(r: f64) -> Result<(), LifshitzError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(LifshitzError::InvalidRadius(r))
    }
}

/// Squared reflection factors for both polarizations at one `(eps, p)`.
///
/// Polarization 1 is `(s - p eps)/(s + p eps)`, polarization 2 is
/// `(s - p)/(s + p)`. The complements `1 - r^2` are stored separately
/// because they are computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub s: f64,
    pub r1_sq: f64,
    pub r2_sq: f64,
    pub one_minus_r1_sq: f64,
    pub one_minus_r2_sq: f64,
    r1: f64,
    r2: f64,
}

impl ReflectionPair {
    /// From `eps` (>= 1, may be `+inf`) and `p >= 1`.
    pub fn new(eps: f64, p: f64) -> Result<Self, LifshitzError> {
        if !(eps >= 1.0) {
            return Err(LifshitzError::PermittivityBelowOne(eps));
        }
        if !(p >= 1.0) {
            return Err(LifshitzError::MomentumBelowOne(p));
        }
        Ok(Self::from_susceptibility(eps - 1.0, p))
    }

    /// From `u = eps - 1 >= 0` directly, which avoids rounding `eps - 1`
    /// when eps is close to one.
    pub(crate) fn from_susceptibility(u: f64, p: f64) -> Self {
        if u.is_infinite() {
            return Self {
                s: f64::INFINITY,
                r1_sq: 1.0,
                r2_sq: 1.0,
                one_minus_r1_sq: 0.0,
                one_minus_r2_sq: 0.0,
                r1: -1.0,
                r2: 1.0,
            };
        }
        let s = (u + p * p).sqrt();
        let p_eps = p * (1.0 + u);
        let d1 = s + p_eps;
        let d2 = s + p;
        // s^2 - (p eps)^2 = u (1 - 2p^2 - p^2 u) and s^2 - p^2 = u.
        let r1 = (u / d1) * ((1.0 - 2.0 * p * p - p * p * u) / d1);
        let r2 = (u / d2) / d2;
        Self {
            s,
            r1_sq: r1 * r1,
            r2_sq: r2 * r2,
            one_minus_r1_sq: 4.0 * (s / d1) * (p_eps / d1),
            one_minus_r2_sq: 4.0 * (s / d2) * (p / d2),
            r1,
            r2,
        }
    }

    /// `d(r1^2)/dx` and `d(r2^2)/dx` at fixed p, given `du/dx`.
    pub(crate) fn x_derivatives(&self, u: f64, du_dx: f64, p: f64) -> (f64, f64) {
        if u.is_infinite() || du_dx == 0.0 {
            return (0.0, 0.0);
        }
        let s = self.s;
        let d1 = s + p * (1.0 + u);
        let d2 = s + p;
        let dr1 = -(p / d1) * (du_dx / d1) * (u + 2.0 * p * p - 1.0) / s;
        let dr2 = (p / d2) * (du_dx / d2) / s;
        (2.0 * self.r1 * dr1, 2.0 * self.r2 * dr2)
    }
}

/// Force (or pressure) with its perfect-conductor reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceResult {
    /// Pa for plates, N for sphere-plate.
    pub value: f64,
    pub ideal: f64,
    pub correction_factor: f64,
    /// Same units as `value`.
    pub error: f64,
}

/// Energy per unit area, J/m^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyResult {
    pub value: f64,
    pub ideal: f64,
    pub correction_factor: f64,
    pub error: f64,
}

/// `-pi^2 hbar c / (240 a^4)`, Pa.
pub fn ideal_pressure(a: f64) -> f64 {
    -PI * PI * HBAR_C / (240.0 * a.powi(4))
}

/// `-pi^3 hbar c R / (360 a^3)`, N.
pub fn ideal_sphere_force(a: f64, radius: f64) -> f64 {
    -PI.powi(3) * HBAR_C * radius / (360.0 * a.powi(3))
}

/// `-pi^2 hbar c / (720 a^3)`, J/m^2.
pub fn ideal_energy_density(a: f64) -> f64 {
    -PI * PI * HBAR_C / (720.0 * a.powi(3))
}

/// Samples `u = eps - 1` and `d ln u / d ln xi` in the (x, t) variables.
struct Susceptibility<'a> {
    model: &'a DielectricModel,
    /// `xi = scale * x * t`.
    scale: f64,
    /// `2a / delta_0` for the plasma model.
    plasma_k: f64,
}

impl<'a> Susceptibility<'a> {
    fn new(model: &'a DielectricModel, a: f64) -> Self {
        let plasma_k = match model {
            DielectricModel::Plasma(m) => 2.0 * a / m.penetration_depth(),
            _ => 0.0,
        };
        Self {
            model,
            scale: SPEED_OF_LIGHT / (2.0 * a),
            plasma_k,
        }
    }

    /// `(u, d ln u / d ln xi)`.
    fn at(&self, x: f64, t: f64) -> (f64, f64) {
        match self.model {
            DielectricModel::PerfectConductor => (f64::INFINITY, 0.0),
            // u = 1/alpha^2 with alpha = (delta_0/a) x t / 2; depends on (a, lambda_p)
            // only through delta_0/a.
            DielectricModel::Plasma(_) => {
                let q = self.plasma_k / (x * t);
                (q * q, -2.0)
            }
            DielectricModel::Tabulated(m) => {
                let xi = self.scale * x * t;
                // xi > 0 at every interior quadrature node.
                let u = m.susceptibility(xi).unwrap_or(0.0);
                let slope = m.log_slope(xi).unwrap_or(0.0);
                (u, slope)
            }
        }
    }
}

fn validate_model_frequency(model: &DielectricModel) -> Result<(), LifshitzError> {
    // Probe once so configuration errors surface as errors rather than as
    // silently zero integrands.
    model.susceptibility(1e15)?;
    Ok(())
}

/// Deficit of the plate integrand at `(x, t)`:
/// `x^3 sum_i (1 - r_i^2) e^x / ((e^x - 1)(e^x - r_i^2))`.
fn plate_deficit(sus: &Susceptibility<'_>, x: f64, t: f64) -> f64 {
    let p = 1.0 / t;
    let (u, _) = sus.at(x, t);
    let pair = ReflectionPair::from_susceptibility(u, p);
    let em = x.exp_m1();
    let ex = em + 1.0;
    let term = |c: f64| c * ex / (em * (em + c));
    x.powi(3) * (term(pair.one_minus_r1_sq) + term(pair.one_minus_r2_sq))
}

/// Deficit of the log-form energy integrand:
/// `x^2 sum_i ln(1 + (1 - r_i^2)/(e^x - 1))`.
fn energy_deficit(sus: &Susceptibility<'_>, x: f64, t: f64) -> f64 {
    let p = 1.0 / t;
    let (u, _) = sus.at(x, t);
    let pair = ReflectionPair::from_susceptibility(u, p);
    let em = x.exp_m1();
    x * x * ((pair.one_minus_r1_sq / em).ln_1p() + (pair.one_minus_r2_sq / em).ln_1p())
}

/// Deficit of the sphere integrand after integration by parts in x:
/// `x^3 sum_i [(1 - r_i^2) e^x + (r_i^2)' (e^x - 1)] / ((e^x - 1)(e^x - r_i^2))`.
fn sphere_deficit(sus: &Susceptibility<'_>, x: f64, t: f64) -> f64 {
    let p = 1.0 / t;
    let (u, slope) = sus.at(x, t);
    let pair = ReflectionPair::from_susceptibility(u, p);
    let du_dx = if u.is_finite() { slope * u / x } else { 0.0 };
    let (g1, g2) = pair.x_derivatives(u, du_dx, p);
    let em = x.exp_m1();
    let ex = em + 1.0;
    let term = |c: f64, g: f64| (c * ex + g * em) / (em * (em + c));
    x.powi(3) * (term(pair.one_minus_r1_sq, g1) + term(pair.one_minus_r2_sq, g2))
}

fn integrate_deficit<F>(
    what: &'static str,
    a: f64,
    settings: &QuadratureSettings,
    f: F,
) -> Result<IntegralEstimate, LifshitzError>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_2d_compact(f, settings).map_err(|source| LifshitzError::Quadrature {
        what,
        separation: a,
        source,
    })
}

/// Casimir pressure between two plates, Pa (negative: attractive).
pub fn pressure_plates_exact(
    model: &DielectricModel,
    a: f64,
    settings: &QuadratureSettings,
) -> Result<ForceResult, LifshitzError> {
    check_separation(a)?;
    validate_model_frequency(model)?;
    let ideal = ideal_pressure(a);
    let sus = Susceptibility::new(model, a);
    let deficit = integrate_deficit("plate pressure", a, settings, |x, t| plate_deficit(&sus, x, t))?;
    let factor = 1.0 - deficit.value / PLATE_IDEAL_INTEGRAL;
    Ok(ForceResult {
        value: ideal * factor,
        ideal,
        correction_factor: factor,
        error: ideal.abs() * deficit.error / PLATE_IDEAL_INTEGRAL,
    })
}

/// Casimir energy per unit area between two plates, J/m^2.
pub fn energy_density_exact(
    model: &DielectricModel,
    a: f64,
    settings: &QuadratureSettings,
) -> Result<EnergyResult, LifshitzError> {
    check_separation(a)?;
    validate_model_frequency(model)?;
    let ideal = ideal_energy_density(a);
    let sus = Susceptibility::new(model, a);
    let deficit = integrate_deficit("energy density", a, settings, |x, t| energy_deficit(&sus, x, t))?;
    let factor = 1.0 - deficit.value / ENERGY_IDEAL_INTEGRAL;
    Ok(EnergyResult {
        value: ideal * factor,
        ideal,
        correction_factor: factor,
        error: ideal.abs() * deficit.error / ENERGY_IDEAL_INTEGRAL,
    })
}

/// Sphere-plate force from the integrated-by-parts (derivative) integrand, N.
pub fn force_sphere_exact(
    model: &DielectricModel,
    a: f64,
    radius: f64,
    settings: &QuadratureSettings,
) -> Result<ForceResult, LifshitzError> {
    check_separation(a)?;
    check_radius(radius)?;
    validate_model_frequency(model)?;
    let ideal = ideal_sphere_force(a, radius);
    let sus = Susceptibility::new(model, a);
    let deficit = integrate_deficit("sphere force", a, settings, |x, t| sphere_deficit(&sus, x, t))?;
    let factor = 1.0 - deficit.value / PLATE_IDEAL_INTEGRAL;
    Ok(ForceResult {
        value: ideal * factor,
        ideal,
        correction_factor: factor,
        error: ideal.abs() * deficit.error / PLATE_IDEAL_INTEGRAL,
    })
}

/// Sphere-plate force from the logarithmic integrand, `2 pi R E(a)`, N.
pub fn force_sphere_log_form(
    model: &DielectricModel,
    a: f64,
    radius: f64,
    settings: &QuadratureSettings,
) -> Result<ForceResult, LifshitzError> {
    check_radius(radius)?;
    let energy = energy_density_exact(model, a, settings)?;
    let scale = 2.0 * PI * radius;
    Ok(ForceResult {
        value: scale * energy.value,
        ideal: ideal_sphere_force(a, radius),
        correction_factor: energy.correction_factor,
        error: scale * energy.error,
    })
}

/// Exact correction factor for either geometry.
pub fn force_exact(
    model: &DielectricModel,
    geometry: Geometry,
    settings: &QuadratureSettings,
) -> Result<ForceResult, LifshitzError> {
    match geometry {
        Geometry::PlatesGap { separation } => pressure_plates_exact(model, separation, settings),
        Geometry::SpherePlate { separation, radius } => {
            force_sphere_exact(model, separation, radius, settings)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn reflection_vacuum() {
        let r = ReflectionPair::new(1.0, 2.0).unwrap();
        assert_eq!(r.s, 2.0);
        assert_eq!(r.r1_sq, 0.0);
        assert_eq!(r.r2_sq, 0.0);
        assert_eq!(r.one_minus_r1_sq, 1.0);
        assert_eq!(r.one_minus_r2_sq, 1.0);
    }

    #[test]
    fn reflection_eps_two() {
        let r = ReflectionPair::new(2.0, 1.0).unwrap();
        let s = 2f64.sqrt();
        assert!((r.s - s).abs() < 1e-15);
        let e1 = ((s - 2.0) / (s + 2.0)).powi(2);
        let e2 = ((s - 1.0) / (s + 1.0)).powi(2);
        assert!((r.r1_sq - e1).abs() < 1e-15);
        assert!((r.r2_sq - e2).abs() < 1e-15);
        assert!((r.r1_sq - 0.029437).abs() < 1e-6);
        assert!((r.r2_sq - 0.029437).abs() < 1e-6);
        assert!((r.one_minus_r1_sq - (1.0 - e1)).abs() < 1e-15);
    }

    #[test]
    fn reflection_ideal_limit() {
        let r = ReflectionPair::new(1e12, 1.0).unwrap();
        assert!((r.r1_sq - 1.0).abs() < 1e-5);
        assert!((r.r2_sq - 1.0).abs() < 1e-5);
        let r = ReflectionPair::new(f64::INFINITY, 3.0).unwrap();
        assert_eq!((r.r1_sq, r.r2_sq), (1.0, 1.0));
    }

    #[test]
    fn reflection_domain_errors() {
        assert_eq!(
            ReflectionPair::new(0.5, 1.0),
            Err(LifshitzError::PermittivityBelowOne(0.5))
        );
        assert!(ReflectionPair::new(f64::NAN, 1.0).is_err());
        assert_eq!(
            ReflectionPair::new(2.0, 0.9),
            Err(LifshitzError::MomentumBelowOne(0.9))
        );
    }

    #[test]
    fn reflection_derivatives_match_finite_differences() {
        // Plasma model: u = (k / x)^2 at fixed p.
        let (k, p, x) = (40.0, 1.7, 2.3);
        let u = |x: f64| (k / x).powi(2);
        let pair = ReflectionPair::from_susceptibility(u(x), p);
        let (g1, g2) = pair.x_derivatives(u(x), -2.0 * u(x) / x, p);
        let h = 1e-5;
        let plus = ReflectionPair::from_susceptibility(u(x + h), p);
        let minus = ReflectionPair::from_susceptibility(u(x - h), p);
        let fd1 = (plus.r1_sq - minus.r1_sq) / (2.0 * h);
        let fd2 = (plus.r2_sq - minus.r2_sq) / (2.0 * h);
        assert!((g1 - fd1).abs() < 1e-8 * fd1.abs().max(1e-3), "{g1} vs {fd1}");
        assert!((g2 - fd2).abs() < 1e-8 * fd2.abs().max(1e-3), "{g2} vs {fd2}");
    }

    #[test]
    fn ideal_closed_forms() {
        let p = ideal_pressure(1e-6);
        assert!((p / -1.300e-3 - 1.0).abs() < 1e-3, "{p}");
        let f = ideal_sphere_force(1e-6, 100e-6);
        assert!((f / -2.72e-13 - 1.0).abs() < 2e-3, "{f}");
        assert!((ideal_pressure(2e-6) / ideal_pressure(1e-6) - 1.0 / 16.0).abs() < 1e-15);
        // F_sphere = 2 pi R E
        let e = ideal_energy_density(1e-6);
        assert!((2.0 * PI * 100e-6 * e / f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_gives_no_energy() {
        // eps == 1 everywhere: a table with zero absorption.
        use crate::dielectric::{PermittivityTable, TabulatedModel, TailPolicy};
        let table = PermittivityTable::new(vec![(1e14, 0.0), (1e16, 0.0)], TailPolicy::NONE).unwrap();
        let model = DielectricModel::Tabulated(TabulatedModel::new(table, 10).unwrap());
        let e = energy_density_exact(&model, 1e-6, &settings()).unwrap();
        assert!(e.value.abs() < 1e-12 * e.ideal.abs(), "{e:?}");
        let f = pressure_plates_exact(&model, 1e-6, &settings()).unwrap();
        assert!(f.value.abs() < 1e-12 * f.ideal.abs(), "{f:?}");
    }

    #[test]
    fn perfect_conductor_has_no_deficit() {
        let m = DielectricModel::PerfectConductor;
        let f = pressure_plates_exact(&m, 1e-6, &settings()).unwrap();
        assert_eq!(f.correction_factor, 1.0);
        assert_eq!(f.value, ideal_pressure(1e-6));
        let f = force_sphere_exact(&m, 1e-6, 1e-4, &settings()).unwrap();
        assert_eq!(f.correction_factor, 1.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::PlatesGap { separation: 0.0 }.validate(100.0).is_err());
        assert!(Geometry::SpherePlate {
            separation: 1e-6,
            radius: -1.0
        }
        .validate(100.0)
        .is_err());
        let w = Geometry::SpherePlate {
            separation: 0.5e-6,
            radius: 1e-6,
        }
        .validate(100.0)
        .unwrap();
        assert!(matches!(w, Some(GeometryWarning::SmallRadiusRatio { .. })));
        assert_eq!(
            Geometry::SpherePlate {
                separation: 0.5e-6,
                radius: 100e-6
            }
            .validate(100.0),
            Ok(None)
        );
    }

    #[test]
    fn invalid_separation_rejected() {
        let m = DielectricModel::plasma_nm(98.0).unwrap();
        assert!(matches!(
            pressure_plates_exact(&m, -1.0, &settings()),
            Err(LifshitzError::InvalidSeparation(_))
        ));
        assert!(matches!(
            force_sphere_exact(&m, 1e-6, 0.0, &settings()),
            Err(LifshitzError::InvalidRadius(_))
        ));
    }
}
