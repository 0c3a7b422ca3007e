//! Dielectric permittivity on the imaginary frequency axis, `eps(i xi)`.
//!
//! Two sources are supported: the plasma (free-electron, no relaxation)
//! model and tabulated absorption data `eps''(omega)` converted with the
//! Kramers-Kronig dispersion relation
//!
//! ```text
//! eps(i xi) = 1 + (2/pi) * integral_0^inf omega eps''(omega) / (omega^2 + xi^2) d omega
//! ```
//!
//! The source of the optical data usually does not print the dispersion
//! relation it used; the standard form above is assumed.

use std::f64::consts::PI;
use std::io::Read;
use std::sync::Arc;

use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::quadrature::{integrate_1d, QuadratureSettings, Upper};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DielectricError {
    #[error("frequency must be positive and finite, got {0}")]
    NonPositiveFrequency(f64),
    #[error("plasma wavelength must be positive and finite, got {0} m")]
    InvalidPlasmaWavelength(f64),
    #[error("memoization grid needs at least 1 point per decade, got {0}")]
    InvalidGridDensity(usize),
}

/// Validation and parsing failures for permittivity tables. `row` is the
/// 1-based line number in the source file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("fewer than 2 rows (got {rows})")]
    TooFewRows { rows: usize },
    #[error("bad header {found:?}, expected `omega_rad_s,eps_imag`")]
    Header { found: String },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("row {row}: frequency {omega} is not strictly greater than the previous row")]
    NotIncreasing { row: usize, omega: f64 },
    #[error("row {row}: frequency {omega} must be positive and finite")]
    NonPositiveFrequency { row: usize, omega: f64 },
    #[error("row {row}: negative or non-finite absorption eps'' = {eps_imag}")]
    NegativeAbsorption { row: usize, eps_imag: f64 },
    #[error("read error: {0}")]
    Io(String),
}

/// Plasma model `eps(i xi) = 1 + omega_p^2 / xi^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmaModel {
    plasma_wavelength: f64,
}

impl PlasmaModel {
    /// `plasma_wavelength` in meters.
    pub fn new(plasma_wavelength: f64) -> Result<Self, DielectricError> {
        if !(plasma_wavelength > 0.0 && plasma_wavelength.is_finite()) {
            return Err(DielectricError::InvalidPlasmaWavelength(plasma_wavelength));
        }
        Ok(Self { plasma_wavelength })
    }

    pub fn from_nanometers(lambda_nm: f64) -> Result<Self, DielectricError> {
        Self::new(lambda_nm * 1e-9)
    }

    pub fn plasma_wavelength(&self) -> f64 {
        self.plasma_wavelength
    }

    /// `omega_p = 2 pi c / lambda_p`, rad/s.
    pub fn plasma_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.plasma_wavelength
    }

    /// Effective penetration depth `delta_0 = lambda_p / (2 pi)`, m.
    pub fn penetration_depth(&self) -> f64 {
        self.plasma_wavelength / (2.0 * PI)
    }

    /// `eps(i xi) - 1`.
    pub fn susceptibility(&self, xi: f64) -> Result<f64, DielectricError> {
        check_frequency(xi)?;
        let ratio = self.plasma_frequency() / xi;
        Ok(ratio * ratio)
    }

    pub fn eps(&self, xi: f64) -> Result<f64, DielectricError> {
        Ok(1.0 + self.susceptibility(xi)?)
    }
}

fn check_frequency(xi: f64) -> Result<(), DielectricError> {
    if xi > 0.0 && !xi.is_nan() {
        Ok(())
    } else {
        Err(DielectricError::NonPositiveFrequency(xi))
    }
}

/// Which tails of `eps''` are extrapolated outside the tabulated range.
///
/// Below the first row `eps'' ~ 1/omega` (free-electron behavior), above the
/// last row `eps'' ~ 1/omega^3`, each anchored at the nearest row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailPolicy {
    pub low: bool,
    pub high: bool,
}

impl Default for TailPolicy {
    fn default() -> Self {
        Self {
            low: true,
            high: true,
        }
    }
}

impl TailPolicy {
    pub const NONE: TailPolicy = TailPolicy {
        low: false,
        high: false,
    };
}

/// Tabulated `(omega, eps''(omega))` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityTable {
    omega: Vec<f64>,
    eps_imag: Vec<f64>,
    tails: TailPolicy,
}

impl PermittivityTable {
    /// Builds a table from rows; row numbers in errors are 1-based indices
    /// into `rows`.
    pub fn new(rows: Vec<(f64, f64)>, tails: TailPolicy) -> Result<Self, TableError> {
        let numbered: Vec<_> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (w, e))| (i + 1, w, e))
            .collect();
        Self::from_numbered(numbered, tails)
    }

    fn from_numbered(rows: Vec<(usize, f64, f64)>, tails: TailPolicy) -> Result<Self, TableError> {
        let mut previous: Option<f64> = None;
        for &(row, omega, eps_imag) in &rows {
            if !(omega > 0.0 && omega.is_finite()) {
                return Err(TableError::NonPositiveFrequency { row, omega });
            }
            if let Some(prev) = previous {
                if omega <= prev {
                    return Err(TableError::NotIncreasing { row, omega });
                }
            }
            if !(eps_imag >= 0.0 && eps_imag.is_finite()) {
                return Err(TableError::NegativeAbsorption { row, eps_imag });
            }
            previous = Some(omega);
        }
        if rows.len() < 2 {
            return Err(TableError::TooFewRows { rows: rows.len() });
        }
        let (omega, eps_imag) = rows.into_iter().map(|(_, w, e)| (w, e)).unzip();
        Ok(Self {
            omega,
            eps_imag,
            tails,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn tails(&self) -> TailPolicy {
        self.tails
    }

    pub fn with_tails(mut self, tails: TailPolicy) -> Self {
        self.tails = tails;
        self
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.eps_imag.iter().copied())
    }

    pub fn omega_range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    /// `eps(i xi) - 1` from the dispersion relation.
    pub fn susceptibility(&self, xi: f64) -> Result<f64, DielectricError> {
        check_frequency(xi)?;
        let xi2 = xi * xi;
        let n = self.omega.len();
        let mut total = 0.0;

        if self.tails.low {
            // eps'' = e0 w0 / w  =>  integral_0^w0 e0 w0 / (w^2 + xi^2) dw
            let (w0, e0) = (self.omega[0], self.eps_imag[0]);
            total += e0 * w0 * (w0 / xi).atan() / xi;
        }

        let settings = QuadratureSettings {
            rel_tol: 1e-11,
            abs_tol: 1e-300,
            max_subdivisions: 60,
            ..QuadratureSettings::default()
        };
        for i in 0..n - 1 {
            let (w0, w1) = (self.omega[i], self.omega[i + 1]);
            let (e0, e1) = (self.eps_imag[i], self.eps_imag[i + 1]);
            if e0 == 0.0 && e1 == 0.0 {
                continue;
            }
            let (v0, v1) = (w0.ln(), w1.ln());
            let segment = |v: f64| {
                let w = v.exp();
                let e = interpolate_segment(w, w0, w1, e0, e1);
                w * w * e / (w * w + xi2)
            };
            // The segment integrand is smooth; a budget failure still
            // carries an estimate good far below table noise.
            let value = match integrate_1d(segment, v0, Upper::Finite(v1), &settings) {
                Ok(est) => est.value,
                Err(crate::quadrature::QuadratureError::ConvergenceFailure { estimate, .. }) => {
                    estimate.value
                }
                Err(_) => 0.0,
            };
            total += value;
        }

        if self.tails.high {
            // eps'' = e1 (w1 / w)^3  =>  e1 w1^3 integral_w1^inf dw / (w^2 (w^2 + xi^2))
            let (w1, e1) = (self.omega[n - 1], self.eps_imag[n - 1]);
            total += e1 * w1.powi(3) * high_tail_kernel(w1, xi);
        }

        Ok(2.0 / PI * total)
    }

    pub fn eps(&self, xi: f64) -> Result<f64, DielectricError> {
        Ok(1.0 + self.susceptibility(xi)?)
    }
}

/// Log-log linear interpolation, falling back to linear when an endpoint is
/// zero.
fn interpolate_segment(w: f64, w0: f64, w1: f64, e0: f64, e1: f64) -> f64 {
    if e0 > 0.0 && e1 > 0.0 {
        let slope = (e1 / e0).ln() / (w1 / w0).ln();
        e0 * (w / w0).powf(slope)
    } else {
        e0 + (e1 - e0) * (w - w0) / (w1 - w0)
    }
}

/// `integral_w1^inf dw / (w^2 (w^2 + xi^2))`.
fn high_tail_kernel(w1: f64, xi: f64) -> f64 {
    let z = xi / w1;
    if z < 1e-3 {
        // 1/w1^3 * (1/3 - z^2/5 + z^4/7 - ...)
        (1.0 / 3.0 - z * z / 5.0 + z.powi(4) / 7.0 - z.powi(6) / 9.0) / w1.powi(3)
    } else {
        (1.0 / w1 - z.atan() / xi) / (xi * xi)
    }
}

/// Reads a permittivity table in CSV form: header `omega_rad_s,eps_imag`,
/// `#` comment lines, decimal floats.
pub fn load_table<R: Read>(source: R, tails: TailPolicy) -> Result<PermittivityTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(source);

    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(TableError::Io(e.to_string())),
    };
    if headers.is_empty() {
        return Err(TableError::TooFewRows { rows: 0 });
    }
    let found: Vec<&str> = headers.iter().collect();
    if found != ["omega_rad_s", "eps_imag"] {
        return Err(TableError::Header {
            found: found.join(","),
        });
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            TableError::Parse {
                row,
                message: e.to_string(),
            }
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 2 {
            return Err(TableError::Parse {
                row,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let parse = |field: &str| {
            field.parse::<f64>().map_err(|e| TableError::Parse {
                row,
                message: format!("{field:?}: {e}"),
            })
        };
        rows.push((row, parse(&record[0])?, parse(&record[1])?));
    }
    PermittivityTable::from_numbered(rows, tails)
}

/// A permittivity table with `eps(i xi) - 1` precomputed on a logarithmic
/// frequency grid.
///
/// Between grid points `ln(eps - 1)` is interpolated against `ln(xi)` with a
/// monotone cubic (Fritsch-Carlson tangents), which keeps the result
/// non-increasing and continuously differentiable so that the force
/// integrands stay smooth. The grid spans four decades beyond the table on
/// each side; outside it the end tangents are extrapolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    table: Arc<PermittivityTable>,
    log_xi0: f64,
    step: f64,
    log_chi: Vec<f64>,
    /// `d ln(chi) / d ln(xi)` at each grid point.
    tangents: Vec<f64>,
}

impl TabulatedModel {
    pub const DEFAULT_POINTS_PER_DECADE: usize = 40;

    pub fn new(table: PermittivityTable, points_per_decade: usize) -> Result<Self, DielectricError> {
        if points_per_decade == 0 {
            return Err(DielectricError::InvalidGridDensity(points_per_decade));
        }
        let (lo, hi) = table.omega_range();
        let log_lo = (lo * 1e-4).ln();
        let log_hi = (hi * 1e4).ln();
        let step = std::f64::consts::LN_10 / points_per_decade as f64;
        let points = ((log_hi - log_lo) / step).ceil() as usize + 1;
        let log_chi: Vec<f64> = (0..points)
            .map(|i| {
                let xi = (log_lo + step * i as f64).exp();
                let chi = table.susceptibility(xi).expect("grid frequencies are positive");
                // Clamp to keep the logarithm finite for non-absorbing tables.
                chi.max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        let tangents = monotone_tangents(&log_chi, step);
        Ok(Self {
            table: Arc::new(table),
            log_xi0: log_lo,
            step,
            log_chi,
            tangents,
        })
    }

    pub fn table(&self) -> &PermittivityTable {
        &self.table
    }

    /// `(ln chi, d ln chi / d ln xi)` of the interpolant.
    fn interpolate(&self, xi: f64) -> (f64, f64) {
        let pos = (xi.ln() - self.log_xi0) / self.step;
        let n = self.log_chi.len();
        if pos <= 0.0 {
            let m = self.tangents[0];
            return (self.log_chi[0] + m * pos * self.step, m);
        }
        if pos >= (n - 1) as f64 {
            let m = self.tangents[n - 1];
            return (self.log_chi[n - 1] + m * (pos - (n - 1) as f64) * self.step, m);
        }
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        let (y0, y1) = (self.log_chi[i], self.log_chi[i + 1]);
        let (m0, m1) = (self.tangents[i] * self.step, self.tangents[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let slope = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, slope / self.step)
    }

    /// `eps(i xi) - 1`, interpolated.
    pub fn susceptibility(&self, xi: f64) -> Result<f64, DielectricError> {
        check_frequency(xi)?;
        let chi = self.interpolate(xi).0.exp();
        Ok(if chi <= f64::MIN_POSITIVE { 0.0 } else { chi })
    }

    /// `d ln(eps - 1) / d ln(xi)` of the interpolant.
    pub fn log_slope(&self, xi: f64) -> Result<f64, DielectricError> {
        check_frequency(xi)?;
        Ok(self.interpolate(xi).1)
    }

    pub fn eps(&self, xi: f64) -> Result<f64, DielectricError> {
        Ok(1.0 + self.susceptibility(xi)?)
    }
}

/// Fritsch-Carlson tangents for equally spaced data: zero at local extrema,
/// harmonic mean of adjacent secants elsewhere.
fn monotone_tangents(y: &[f64], step: f64) -> Vec<f64> {
    let n = y.len();
    let secants: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / step).collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (secants[i - 1], secants[i]);
        m[i] = if a * b <= 0.0 { 0.0 } else { 2.0 * a * b / (a + b) };
    }
    m
}

/// Source of `eps(i xi)` consumed by the force evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    /// `eps = +inf`: both reflection factors equal one.
    PerfectConductor,
    Plasma(PlasmaModel),
    Tabulated(TabulatedModel),
}

impl DielectricModel {
    pub fn plasma_nm(lambda_nm: f64) -> Result<Self, DielectricError> {
        PlasmaModel::from_nanometers(lambda_nm).map(Self::Plasma)
    }

    pub fn susceptibility(&self, xi: f64) -> Result<f64, DielectricError> {
        match self {
            Self::PerfectConductor => {
                check_frequency(xi)?;
                Ok(f64::INFINITY)
            }
            Self::Plasma(m) => m.susceptibility(xi),
            Self::Tabulated(m) => m.susceptibility(xi),
        }
    }

    pub fn eps(&self, xi: f64) -> Result<f64, DielectricError> {
        Ok(1.0 + self.susceptibility(xi)?)
    }

    /// Penetration depth `delta_0` for the plasma model, zero for a perfect
    /// conductor, `None` for tabulated data.
    pub fn penetration_depth(&self) -> Option<f64> {
        match self {
            Self::PerfectConductor => Some(0.0),
            Self::Plasma(m) => Some(m.penetration_depth()),
            Self::Tabulated(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al() -> PlasmaModel {
        PlasmaModel::from_nanometers(98.0).unwrap()
    }

    #[test]
    fn plasma_examples() {
        let m = al();
        let wp = m.plasma_frequency();
        assert!((m.eps(wp).unwrap() - 2.0).abs() < 1e-15);
        assert!((m.eps(wp / 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((m.eps(wp * 1e12).unwrap() - 1.0).abs() < 1e-20);
    }

    #[test]
    fn plasma_derived_quantities() {
        let m = al();
        let c = m.plasma_frequency() * m.penetration_depth();
        assert!((c / SPEED_OF_LIGHT - 1.0).abs() < 4.0 * f64::EPSILON);
        assert!((m.penetration_depth() - 98e-9 / (2.0 * PI)).abs() < 1e-22);
    }

    #[test]
    fn plasma_rejects_bad_input() {
        let m = al();
        assert_eq!(m.eps(0.0), Err(DielectricError::NonPositiveFrequency(0.0)));
        assert!(m.eps(-1.0).is_err());
        assert!(m.eps(f64::NAN).is_err());
        assert!(PlasmaModel::new(0.0).is_err());
        assert!(PlasmaModel::new(-1e-7).is_err());
        assert!(PlasmaModel::new(f64::INFINITY).is_err());
    }

    #[test]
    fn zero_absorption_table_gives_vacuum() {
        let t =
            PermittivityTable::new(vec![(1e14, 0.0), (1e15, 0.0), (1e16, 0.0)], TailPolicy::NONE).unwrap();
        for xi in [1e10, 1e14, 3e15, 1e20] {
            assert_eq!(t.eps(xi).unwrap(), 1.0);
        }
    }

    #[test]
    fn table_validation() {
        assert_eq!(
            PermittivityTable::new(vec![(1.0, 1.0)], TailPolicy::NONE),
            Err(TableError::TooFewRows { rows: 1 })
        );
        assert!(matches!(
            PermittivityTable::new(vec![(1.0, 1.0), (1.0, 2.0)], TailPolicy::NONE),
            Err(TableError::NotIncreasing { row: 2, .. })
        ));
        assert!(matches!(
            PermittivityTable::new(vec![(1.0, 1.0), (2.0, -2.0)], TailPolicy::NONE),
            Err(TableError::NegativeAbsorption { row: 2, .. })
        ));
        assert!(matches!(
            PermittivityTable::new(vec![(0.0, 1.0), (2.0, 2.0)], TailPolicy::NONE),
            Err(TableError::NonPositiveFrequency { row: 1, .. })
        ));
    }

    #[test]
    fn high_tail_kernel_branches_agree() {
        let w1 = 2.0e16;
        let z = 1e-3;
        let series = high_tail_kernel(w1, z * w1 * 0.999_999);
        let closed = {
            let xi = z * w1 * 1.000_001;
            (1.0 / w1 - (xi / w1).atan() / xi) / (xi * xi)
        };
        assert!((series / closed - 1.0).abs() < 1e-6);
    }

    #[test]
    fn load_minimal_table() {
        let src = "omega_rad_s,eps_imag\n1e14,5.0\n2e14,3.0\n";
        let t = load_table(src.as_bytes(), TailPolicy::default()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows().collect::<Vec<_>>(), vec![(1e14, 5.0), (2e14, 3.0)]);
    }

    #[test]
    fn load_skips_comments() {
        let src = "# Al, synthetic\nomega_rad_s,eps_imag\n# row comment\n1e14,5.0\n2e14,3.0\n3e14,1.0\n";
        let t = load_table(src.as_bytes(), TailPolicy::default()).unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn load_reports_out_of_order_row() {
        let src = "omega_rad_s,eps_imag\n1e14,5.0\n3e14,3.0\n2e14,1.0\n";
        let err = load_table(src.as_bytes(), TailPolicy::default()).unwrap_err();
        assert_eq!(err, TableError::NotIncreasing { row: 4, omega: 2e14 });
        assert!(err.to_string().contains("row 4"));
    }

    #[test]
    fn load_reports_negative_and_garbage() {
        let src = "omega_rad_s,eps_imag\n1e14,5.0\n2e14,-3.0\n";
        let err = load_table(src.as_bytes(), TailPolicy::default()).unwrap_err();
        assert!(matches!(err, TableError::NegativeAbsorption { row: 3, .. }));

        let src = "omega_rad_s,eps_imag\n1e14,5.0\n2e14,abc\n";
        let err = load_table(src.as_bytes(), TailPolicy::default()).unwrap_err();
        assert!(matches!(err, TableError::Parse { row: 3, .. }), "{err:?}");
    }

    #[test]
    fn load_empty_file() {
        let err = load_table("".as_bytes(), TailPolicy::default()).unwrap_err();
        assert_eq!(err, TableError::TooFewRows { rows: 0 });
        assert!(err.to_string().contains("fewer than 2 rows"));
        let err = load_table("omega_rad_s,eps_imag\n".as_bytes(), TailPolicy::default()).unwrap_err();
        assert_eq!(err, TableError::TooFewRows { rows: 0 });
    }

    #[test]
    fn load_rejects_wrong_header() {
        let err = load_table("w,e\n1,2\n3,4\n".as_bytes(), TailPolicy::default()).unwrap_err();
        assert!(matches!(err, TableError::Header { .. }));
    }

    #[test]
    fn memoized_model_tracks_direct_transform() {
        let rows = (0..60)
            .map(|i| {
                let w = 1e13 * 10f64.powf(i as f64 / 15.0);
                (w, 1e3 * (1e14 / w).powf(1.5))
            })
            .collect();
        let table = PermittivityTable::new(rows, TailPolicy::default()).unwrap();
        let memo = TabulatedModel::new(table.clone(), 40).unwrap();
        for xi in [1e11, 3.3e13, 1e15, 7e16, 1e18] {
            let direct = table.susceptibility(xi).unwrap();
            let interp = memo.susceptibility(xi).unwrap();
            assert!(
                (interp / direct - 1.0).abs() < 1e-3,
                "xi={xi}: {interp} vs {direct}"
            );
        }
        assert!(TabulatedModel::new(
            PermittivityTable::new(vec![(1.0, 1.0), (2.0, 1.0)], TailPolicy::NONE).unwrap(),
            0
        )
        .is_err());
    }

    #[test]
    fn perfect_conductor_is_infinite() {
        let m = DielectricModel::PerfectConductor;
        assert_eq!(m.eps(1e15).unwrap(), f64::INFINITY);
        assert!(m.eps(0.0).is_err());
        assert_eq!(m.penetration_depth(), Some(0.0));
    }
}
