//! Adaptive Gauss-Kronrod integration for the semi-infinite one- and
//! two-dimensional integrals used throughout the crate.
//!
//! The engine bisects the panel with the largest error estimate until the
//! global estimate satisfies `err <= max(abs_tol, rel_tol * |value|)`.
//! Each panel is evaluated with the 21-point Kronrod rule and its embedded
//! 10-point Gauss rule. The x axis `[0, inf)` is truncated at
//! [`QuadratureSettings::x_max`]; the p axis `[1, inf)` is compactified with
//! `t = 1/p`.

// Nodes and weights are kept at their published precision.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Kronrod abscissae on `[0, 1]`; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_620,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

/// Smallest admissible x-axis cutoff.
pub const MIN_X_MAX: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature settings: {0}")]
    InvalidSettings(String),
    #[error("invalid integration interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error(
        "no convergence after {subdivisions} subdivisions: value {} with error estimate {} (target {target:e})",
        .estimate.value, .estimate.error
    )]
    ConvergenceFailure {
        estimate: IntegralEstimate,
        subdivisions: usize,
        target: f64,
    },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

/// Tolerances and limits shared by every integration in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections per axis (per inner integral for 2-D).
    pub max_subdivisions: usize,
    /// Truncation point of the `[0, inf)` x axis.
    pub x_max: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 200,
            x_max: 120.0,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QuadratureError::InvalidSettings(format!(
                "relative tolerance must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadratureError::InvalidSettings(format!(
                "absolute tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadratureError::InvalidSettings(
                "subdivision limit must be at least 1".into(),
            ));
        }
        if !(self.x_max >= MIN_X_MAX && self.x_max.is_finite()) {
            return Err(QuadratureError::InvalidSettings(format!(
                "x-axis cutoff must be >= {MIN_X_MAX}, got {}",
                self.x_max
            )));
        }
        Ok(())
    }

    /// Copy with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }
}

/// Result of an integration: value, error estimate and integrand call count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl IntegralEstimate {
    /// Multiplies value and error by a constant.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

/// Upper limit of a one-dimensional integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    /// `+inf`, truncated at the settings' `x_max`.
    Infinity,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Ties broken by position so the bisection order never depends on heap internals.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lower.total_cmp(&self.lower))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 21-point Kronrod panel. The integrand returns `(value, pointwise
/// error)`; the pointwise error (non-zero only for nested integrals) is
/// integrated with the Kronrod weights and added to the panel estimate.
fn kronrod_panel<F>(f: &F, lower: f64, upper: f64) -> Result<Panel, QuadratureError>
where
    F: Fn(f64) -> (f64, f64),
{
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let abs_half = half.abs();

    let eval = |x: f64| -> Result<(f64, f64), QuadratureError> {
        let (v, e) = f(x);
        if v.is_finite() && e.is_finite() {
            Ok((v, e))
        } else {
            Err(QuadratureError::NonFinite { at: x })
        }
    };

    let (f_center, e_center) = eval(center)?;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut nested_err = e_center * WGK[10];
    let mut values = [(0.0, 0.0); 10];

    for (j, (&node, &weight)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * node;
        let (f1, e1) = eval(center - dx)?;
        let (f2, e2) = eval(center + dx)?;
        values[j] = (f1, f2);
        res_kronrod += weight * (f1 + f2);
        res_abs += weight * (f1.abs() + f2.abs());
        nested_err += weight * (e1 + e2);
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let value = res_kronrod * half;
    let error = rescale_error(
        (res_kronrod - res_gauss) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    ) + nested_err * abs_half;

    Ok(Panel {
        lower,
        upper,
        value,
        error,
    })
}

const POINTS_PER_PANEL: usize = 21;

/// Adaptive bisection over `[lower, upper]` for an integrand that also
/// reports a pointwise error.
fn adaptive<F>(
    f: &F,
    lower: f64,
    upper: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, QuadratureError>
where
    F: Fn(f64) -> (f64, f64),
{
    if !(lower.is_finite() && upper.is_finite()) || lower > upper {
        return Err(QuadratureError::InvalidInterval { lower, upper });
    }
    if lower == upper {
        return Ok(IntegralEstimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }

    let first = kronrod_panel(f, lower, upper)?;
    let mut evaluations = POINTS_PER_PANEL;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0usize;

    loop {
        // Sums are recomputed in a fixed order so the result does not depend
        // on floating-point drift from incremental updates.
        let (value, error) = sum_panels(&heap);
        let target = settings.abs_tol.max(settings.rel_tol * value.abs());
        if error <= target {
            return Ok(IntegralEstimate {
                value,
                error,
                evaluations,
            });
        }
        if subdivisions >= settings.max_subdivisions {
            return Err(QuadratureError::ConvergenceFailure {
                estimate: IntegralEstimate {
                    value,
                    error,
                    evaluations,
                },
                subdivisions,
                target,
            });
        }

        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lower + worst.upper);
        if mid <= worst.lower || mid >= worst.upper {
            // Panel cannot be split further in double precision.
            heap.push(worst);
            return Err(QuadratureError::ConvergenceFailure {
                estimate: IntegralEstimate {
                    value,
                    error,
                    evaluations,
                },
                subdivisions,
                target,
            });
        }
        heap.push(kronrod_panel(f, worst.lower, mid)?);
        heap.push(kronrod_panel(f, mid, worst.upper)?);
        evaluations += 2 * POINTS_PER_PANEL;
        subdivisions += 1;
    }
}

fn sum_panels(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|a, b| a.lower.total_cmp(&b.lower));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Integrates `f` over `[lower, upper]`, truncating an infinite upper limit
/// at `settings.x_max`.
pub fn integrate_1d<F>(
    f: F,
    lower: f64,
    upper: Upper,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    let upper = match upper {
        Upper::Finite(b) => b,
        Upper::Infinity => {
            if lower >= settings.x_max {
                return Err(QuadratureError::InvalidInterval {
                    lower,
                    upper: settings.x_max,
                });
            }
            settings.x_max
        }
    };
    adaptive(&|x| (f(x), 0.0), lower, upper, settings)
}

/// Integrates `f(x, p)` over `x in [0, inf)`, `p in [1, inf)`.
///
/// The inner p integral is taken in `t = 1/p` over `(0, 1]` with tolerances
/// tightened tenfold; its error estimates feed into the outer estimate.
/// `f` should decay at least as fast as `p^-2` for the compactified
/// integrand to stay bounded.
pub fn integrate_2d<F>(f: F, settings: &QuadratureSettings) -> Result<IntegralEstimate, QuadratureError>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_2d_compact(
        |x, t| {
            let p = 1.0 / t;
            f(x, p) * p * p
        },
        settings,
    )
}

/// Same as [`integrate_2d`], but `f` is already expressed in `(x, t)` with
/// `t = 1/p` and includes the Jacobian `p^2`.
pub fn integrate_2d_compact<F>(
    f: F,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, QuadratureError>
where
    F: Fn(f64, f64) -> f64,
{
    settings.validate()?;
    let inner_settings = settings.tightened(10.0);
    let failure = std::cell::RefCell::new(None::<QuadratureError>);
    let inner_evals = std::cell::Cell::new(0usize);

    let outer = |x: f64| -> (f64, f64) {
        match adaptive(&|t| (f(x, t), 0.0), 0.0, 1.0, &inner_settings) {
            Ok(est) => {
                inner_evals.set(inner_evals.get() + est.evaluations);
                (est.value, est.error)
            }
            Err(QuadratureError::ConvergenceFailure { estimate, .. }) => {
                inner_evals.set(inner_evals.get() + estimate.evaluations);
                failure
                    .borrow_mut()
                    .get_or_insert(QuadratureError::ConvergenceFailure {
                        estimate,
                        subdivisions: inner_settings.max_subdivisions,
                        target: inner_settings
                            .abs_tol
                            .max(inner_settings.rel_tol * estimate.value.abs()),
                    });
                (estimate.value, estimate.error)
            }
            Err(other) => {
                failure.borrow_mut().get_or_insert(other);
                (0.0, 0.0)
            }
        }
    };

    let result = adaptive(&outer, 0.0, settings.x_max, settings);
    let evaluations = inner_evals.get();
    if let Some(err) = failure.into_inner() {
        return Err(match (err, result) {
            (
                QuadratureError::ConvergenceFailure { subdivisions, .. },
                Ok(est) | Err(QuadratureError::ConvergenceFailure { estimate: est, .. }),
            ) => {
                let estimate = IntegralEstimate { evaluations, ..est };
                QuadratureError::ConvergenceFailure {
                    estimate,
                    subdivisions,
                    target: settings.abs_tol.max(settings.rel_tol * estimate.value.abs()),
                }
            }
            (err, _) => err,
        });
    }
    match result {
        Ok(est) => Ok(IntegralEstimate { evaluations, ..est }),
        Err(QuadratureError::ConvergenceFailure {
            estimate,
            subdivisions,
            target,
        }) => Err(QuadratureError::ConvergenceFailure {
            estimate: IntegralEstimate {
                evaluations,
                ..estimate
            },
            subdivisions,
            target,
        }),
        Err(other) => Err(other),
    }
}
