//! Physical constants. Every computation in the crate reads them from here.

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// `HBAR * SPEED_OF_LIGHT`, J m.
pub const HBAR_C: f64 = HBAR * SPEED_OF_LIGHT;

/// Identifies the constants table in output metadata.
pub const CONSTANTS_VERSION: &str = "CODATA-2018";

/// Plasma wavelength used for aluminium, m.
pub const LAMBDA_P_ALUMINIUM: f64 = 98e-9;

/// Plasma wavelength used for copper and gold, m.
pub const LAMBDA_P_COPPER_GOLD: f64 = 132e-9;
