//! Casimir forces between real metals.
//!
//! Exact evaluation of the regularized Lifshitz integrals for two plates and
//! for a sphere (or lens) above a plate, the closed-form conductivity
//! correction series up to fourth order in `delta_0 / a`, and an analysis
//! layer that cross-checks one against the other.
//!
//! ```
//! use casimir_core::{pressure_plates_exact, DielectricModel, QuadratureSettings};
//!
//! let aluminium = DielectricModel::plasma_nm(98.0).unwrap();
//! let p = pressure_plates_exact(&aluminium, 0.5e-6, &QuadratureSettings::default()).unwrap();
//! assert!((p.correction_factor - 0.85).abs() < 0.01);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod dielectric;
pub mod lifshitz;
pub mod perturbation;
pub mod quadrature;

pub use analysis::{
    compare_series_vs_exact, extract_coefficients, fit_correction_series, AnalysisError, ComparisonRow,
    FitReport,
};
pub use dielectric::{
    load_table, DielectricError, DielectricModel, PermittivityTable, PlasmaModel, TableError, TabulatedModel,
    TailPolicy,
};
pub use lifshitz::{
    energy_density_exact, force_exact, force_sphere_exact, force_sphere_log_form, ideal_energy_density,
    ideal_pressure, ideal_sphere_force, pressure_plates_exact, EnergyResult, ForceResult, Geometry,
    GeometryWarning, LifshitzError, ReflectionPair,
};
pub use perturbation::{
    correction_factor_series, interpolation_comparison, pft_order_consistency, series_coefficients,
    GeometryKind, SeriesCoefficients, SeriesError, SeriesFactor, Validity,
};
pub use quadrature::{
    integrate_1d, integrate_2d, IntegralEstimate, QuadratureError, QuadratureSettings, Upper,
};
