//! Command-line flags and their resolution into a validated run
//! configuration.

use std::fmt::Write as _;
use std::fs::File;
use std::path::PathBuf;

use casimir_core::analysis::{log_grid, MAX_FIT_RATIO, MIN_FIT_POINTS};
use casimir_core::constants::{LAMBDA_P_ALUMINIUM, LAMBDA_P_COPPER_GOLD};
use casimir_core::lifshitz::DEFAULT_MIN_RADIUS_RATIO;
use casimir_core::perturbation::MAX_ORDER;
use casimir_core::{
    load_table, DielectricModel, Geometry, GeometryKind, GeometryWarning, QuadratureSettings, TabulatedModel,
    TailPolicy,
};
use clap::{Parser, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Force (plates: pressure) with units and correction factor.
    Force,
    /// Exact correction factor next to the series at `--order`.
    Factor,
    /// Exact factor against the order-4 and order-2 series (CSV).
    Compare,
    /// Least-squares extraction of the series coefficients.
    Fit,
    /// Self-consistency checks with PASS/FAIL lines.
    Verify,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Force => "force",
            Self::Factor => "factor",
            Self::Compare => "compare",
            Self::Fit => "fit",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Plates,
    Sphere,
}

impl From<GeometryArg> for GeometryKind {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Plates => GeometryKind::Plates,
            GeometryArg::Sphere => GeometryKind::Sphere,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Material {
    /// Aluminium, lambda_p = 98 nm.
    Al,
    /// Copper, lambda_p = 132 nm.
    Cu,
    /// Gold, lambda_p = 132 nm.
    Au,
    /// Plasma wavelength from `--lambda-p`.
    Custom,
}

impl Material {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Al => "al",
            Self::Cu => "cu",
            Self::Au => "au",
            Self::Custom => "custom",
        }
    }

    /// Preset plasma wavelength in nm.
    pub fn preset_nm(&self) -> Option<f64> {
        match self {
            Self::Al => Some(LAMBDA_P_ALUMINIUM * 1e9),
            Self::Cu | Self::Au => Some(LAMBDA_P_COPPER_GOLD * 1e9),
            Self::Custom => None,
        }
    }
}

/// Casimir forces between real metals: exact Lifshitz integrals and the
/// finite-conductivity correction series.
#[derive(Debug, Clone, Parser)]
#[command(name = "casimir", version)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "force")]
    pub mode: Mode,

    #[arg(long, value_enum, default_value = "plates")]
    pub geometry: GeometryArg,

    #[arg(long, value_enum, default_value = "al")]
    pub material: Material,

    /// Plasma wavelength in nm; overrides the material preset.
    #[arg(long = "lambda-p", value_name = "NM", allow_negative_numbers = true)]
    pub lambda_p: Option<f64>,

    /// Permittivity table (`omega_rad_s,eps_imag` CSV) instead of the
    /// plasma model.
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,

    /// Do not extrapolate the table below its first frequency.
    #[arg(long)]
    pub no_low_tail: bool,

    /// Do not extrapolate the table above its last frequency.
    #[arg(long)]
    pub no_high_tail: bool,

    /// Memoization grid density for tabulated data, points per decade.
    #[arg(long, default_value_t = TabulatedModel::DEFAULT_POINTS_PER_DECADE)]
    pub grid_density: usize,

    /// Sphere radius in um.
    #[arg(
        long,
        value_name = "UM",
        default_value_t = 100.0,
        allow_negative_numbers = true
    )]
    pub radius: f64,

    /// Smallest separation in um.
    #[arg(long, value_name = "UM", default_value_t = 0.5, allow_negative_numbers = true)]
    pub a_min: f64,

    /// Largest separation in um [default: a-min].
    #[arg(long, value_name = "UM", allow_negative_numbers = true)]
    pub a_max: Option<f64>,

    /// Number of grid points [default: 1 for a single separation, 10
    /// otherwise; 8 in fit mode].
    #[arg(long)]
    pub points: Option<usize>,

    /// Logarithmic instead of linear spacing.
    #[arg(long)]
    pub log: bool,

    /// Smallest delta_0/a in fit mode.
    #[arg(long, default_value_t = 0.002, allow_negative_numbers = true)]
    pub r_min: f64,

    /// Largest delta_0/a in fit mode.
    #[arg(long, default_value_t = MAX_FIT_RATIO, allow_negative_numbers = true)]
    pub r_max: f64,

    /// Series order for factor mode.
    #[arg(long, default_value_t = MAX_ORDER)]
    pub order: usize,

    #[arg(long, default_value_t = QuadratureSettings::default().rel_tol)]
    pub rel_tol: f64,

    #[arg(long, default_value_t = QuadratureSettings::default().abs_tol)]
    pub abs_tol: f64,

    #[arg(long, default_value_t = QuadratureSettings::default().max_subdivisions)]
    pub max_subdivisions: usize,

    /// Cutoff of the x axis of the integrals.
    #[arg(long, default_value_t = QuadratureSettings::default().x_max)]
    pub x_max: f64,

    /// Below this R/a the sphere geometry emits a warning.
    #[arg(long, default_value_t = DEFAULT_MIN_RADIUS_RATIO)]
    pub min_radius_ratio: f64,

    /// Write the report to a file instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Replaces the expected plate c3 in verify mode (fault injection).
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub inject_c3: Option<f64>,
}

/// Where the permittivity comes from.
#[derive(Debug, Clone)]
pub enum MaterialSource {
    Plasma { name: &'static str, lambda_nm: f64 },
    Table { path: PathBuf },
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub geometry: GeometryKind,
    pub source: MaterialSource,
    pub model: DielectricModel,
    /// Sphere radius in meters.
    pub radius: f64,
    pub radius_um: f64,
    /// Separations in meters, strictly increasing.
    pub separations: Vec<f64>,
    /// The same separations as entered, in um.
    pub separations_um: Vec<f64>,
    pub spacing_log: bool,
    /// Fit grid in `delta_0/a`.
    pub fit_ratios: Vec<f64>,
    pub order: usize,
    pub settings: QuadratureSettings,
    pub min_radius_ratio: f64,
    pub output: Option<PathBuf>,
    pub inject_c3: Option<f64>,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!(
            "--{name} must be positive and finite, got {value}"
        )))
    }
}

fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    if log {
        return log_grid(lo, hi, n);
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let settings = QuadratureSettings {
            rel_tol: cli.rel_tol,
            abs_tol: cli.abs_tol,
            max_subdivisions: cli.max_subdivisions,
            x_max: cli.x_max,
        };
        settings.validate().map_err(|e| usage(e.to_string()))?;

        if cli.order > MAX_ORDER {
            return Err(usage(format!(
                "--order must be in 0..={MAX_ORDER}, got {}",
                cli.order
            )));
        }

        let (source, model) = match &cli.table {
            Some(path) => {
                let tails = TailPolicy {
                    low: !cli.no_low_tail,
                    high: !cli.no_high_tail,
                };
                let file =
                    File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
                let table = load_table(file, tails).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                let tabulated =
                    TabulatedModel::new(table, cli.grid_density).map_err(|e| usage(e.to_string()))?;
                (
                    MaterialSource::Table { path: path.clone() },
                    DielectricModel::Tabulated(tabulated),
                )
            }
            None => {
                let lambda_nm = match (cli.lambda_p, cli.material.preset_nm()) {
                    (Some(l), _) | (None, Some(l)) => l,
                    (None, None) => {
                        return Err(usage("--material custom needs --lambda-p"));
                    }
                };
                let model = DielectricModel::plasma_nm(lambda_nm)
                    .map_err(|_| usage(format!("--lambda-p must be positive and finite, got {lambda_nm}")))?;
                (
                    MaterialSource::Plasma {
                        name: cli.material.name(),
                        lambda_nm,
                    },
                    model,
                )
            }
        };

        let a_min = positive("a-min", cli.a_min)?;
        let a_max = positive("a-max", cli.a_max.unwrap_or(a_min))?;
        if a_max < a_min {
            return Err(usage(format!("--a-max ({a_max}) is below --a-min ({a_min})")));
        }
        let points = cli.points.unwrap_or(if a_max == a_min { 1 } else { 10 });
        if points == 0 {
            return Err(usage("--points must be at least 1"));
        }
        if points > 1 && a_max == a_min {
            return Err(usage("--points > 1 needs --a-max greater than --a-min"));
        }
        let separations_um = grid(a_min, a_max, points, cli.log);
        let separations = separations_um.iter().map(|a| a * 1e-6).collect();

        let fit_points = cli.points.unwrap_or(MIN_FIT_POINTS);
        let fit_ratios = if cli.mode == Mode::Fit {
            let (lo, hi) = (positive("r-min", cli.r_min)?, positive("r-max", cli.r_max)?);
            if !(hi > lo && hi <= MAX_FIT_RATIO) {
                return Err(usage(format!(
                    "fit range needs r-min < r-max <= {MAX_FIT_RATIO}, got [{lo}, {hi}]"
                )));
            }
            if fit_points < MIN_FIT_POINTS {
                return Err(usage(format!("fit mode needs --points >= {MIN_FIT_POINTS}")));
            }
            log_grid(lo, hi, fit_points)
        } else {
            Vec::new()
        };

        if matches!(cli.mode, Mode::Compare) && model.penetration_depth().is_none() {
            return Err(usage("compare mode needs a plasma model (drop --table)"));
        }

        let min_radius_ratio = positive("min-radius-ratio", cli.min_radius_ratio)?;
        Ok(Self {
            mode: cli.mode,
            geometry: cli.geometry.into(),
            source,
            model,
            radius: positive("radius", cli.radius)? * 1e-6,
            radius_um: cli.radius,
            separations,
            separations_um,
            spacing_log: cli.log,
            fit_ratios,
            order: cli.order,
            settings,
            min_radius_ratio,
            output: cli.output.clone(),
            inject_c3: cli.inject_c3,
        })
    }

    pub fn geometry_at(&self, separation: f64) -> Geometry {
        match self.geometry {
            GeometryKind::Plates => Geometry::PlatesGap { separation },
            GeometryKind::Sphere => Geometry::SpherePlate {
                separation,
                radius: self.radius,
            },
        }
    }

    /// Proximity-force warnings for every separation of the sweep.
    pub fn geometry_warnings(&self) -> Vec<GeometryWarning> {
        self.separations
            .iter()
            .filter_map(|&a| self.geometry_at(a).validate(self.min_radius_ratio).ok().flatten())
            .collect()
    }

    /// `#`-prefixed lines echoing the configuration; no timestamps, so the
    /// output is byte-identical across runs.
    pub fn metadata(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# casimir {}", env!("CARGO_PKG_VERSION"));
        let material = match &self.source {
            MaterialSource::Plasma { name, lambda_nm } => {
                format!("material={name} lambda_p_nm={lambda_nm}")
            }
            MaterialSource::Table { path } => format!("table={}", path.display()),
        };
        let _ = writeln!(
            out,
            "# mode={} geometry={} {material}",
            self.mode.name(),
            self.geometry
        );
        if self.geometry == GeometryKind::Sphere {
            let _ = writeln!(out, "# radius_um={}", self.radius_um);
        }
        if self.mode == Mode::Fit {
            let _ = writeln!(
                out,
                "# r_min={} r_max={} points={}",
                self.fit_ratios[0],
                self.fit_ratios[self.fit_ratios.len() - 1],
                self.fit_ratios.len()
            );
        } else {
            let _ = writeln!(
                out,
                "# a_min_um={} a_max_um={} points={} spacing={} order={}",
                self.separations_um[0],
                self.separations_um[self.separations_um.len() - 1],
                self.separations.len(),
                if self.spacing_log { "log" } else { "linear" },
                self.order
            );
        }
        let s = &self.settings;
        let _ = writeln!(
            out,
            "# rel_tol={:e} abs_tol={:e} max_subdivisions={} x_max={}",
            s.rel_tol, s.abs_tol, s.max_subdivisions, s.x_max
        );
        let _ = writeln!(
            out,
            "# constants={} hbar={:e} c={:e}",
            casimir_core::constants::CONSTANTS_VERSION,
            casimir_core::constants::HBAR,
            casimir_core::constants::SPEED_OF_LIGHT
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("casimir").chain(args.iter().copied()))
            .map_err(|e| usage(e.to_string()))?;
        RunConfig::from_cli(&cli)
    }

    #[test]
    fn presets_resolve_to_plasma_wavelengths() {
        for (name, nm) in [("al", 98.0), ("cu", 132.0), ("au", 132.0)] {
            let c = parse(&["--material", name]).unwrap();
            let depth = c.model.penetration_depth().unwrap();
            assert!((depth * 2.0 * std::f64::consts::PI - nm * 1e-9).abs() < 1e-20);
        }
        let c = parse(&["--material", "al", "--lambda-p", "110"]).unwrap();
        assert!(matches!(c.source, MaterialSource::Plasma { lambda_nm, .. } if lambda_nm == 110.0));
    }

    #[test]
    fn invalid_inputs_are_usage_errors() {
        for args in [
            &["--material", "custom"][..],
            &["--material", "custom", "--lambda-p", "0"],
            &["--a-min", "-1"],
            &["--a-min", "2", "--a-max", "1"],
            &["--a-min", "1", "--points", "3"],
            &["--order", "5"],
            &["--rel-tol", "0"],
            &["--x-max", "10"],
            &["--mode", "fit", "--r-max", "0.05"],
            &["--mode", "fit", "--points", "4"],
        ] {
            assert!(matches!(parse(args), Err(CliError::Usage(_))), "{args:?}");
        }
    }

    #[test]
    fn grids_are_increasing_with_exact_endpoints() {
        let c = parse(&["--a-min", "0.1", "--a-max", "3", "--points", "3", "--log"]).unwrap();
        assert_eq!(c.separations.len(), 3);
        assert_eq!(c.separations_um[0], 0.1);
        assert_eq!(c.separations_um[2], 3.0);
        assert!((c.separations_um[1] - (3f64 * 0.1).sqrt()).abs() < 1e-12);
        assert!((c.separations[1] - c.separations_um[1] * 1e-6).abs() < 1e-20);
        let lin = parse(&["--a-min", "1", "--a-max", "2", "--points", "5"]).unwrap();
        assert!((lin.separations[1] - 1.25e-6).abs() < 1e-18);
        let fit = parse(&["--mode", "fit"]).unwrap();
        assert_eq!(fit.fit_ratios.len(), 8);
        assert_eq!(fit.fit_ratios[7], MAX_FIT_RATIO);
    }

    #[test]
    fn small_radius_ratio_warns() {
        let c = parse(&["--geometry", "sphere", "--radius", "1", "--a-min", "0.5"]).unwrap();
        assert_eq!(c.geometry_warnings().len(), 1);
        let c = parse(&["--geometry", "sphere", "--a-min", "0.5"]).unwrap();
        assert!(c.geometry_warnings().is_empty());
    }

    #[test]
    fn metadata_is_stable() {
        let c = parse(&[
            "--mode", "compare", "--a-min", "0.1", "--a-max", "3", "--points", "3",
        ])
        .unwrap();
        assert_eq!(c.metadata(), c.metadata());
        assert!(c.metadata().lines().all(|l| l.starts_with("# ")));
        assert!(c.metadata().contains("constants=CODATA-2018"));
    }
}
