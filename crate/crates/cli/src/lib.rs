//! Command-line front end for `casimir_core`.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage error. Every
//! failure prints exactly one line starting with `error:` on stderr.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

pub use commands::{cmd_compare, cmd_factor, cmd_fit, cmd_force, cmd_verify, Report};
pub use config::{Cli, GeometryArg, Material, MaterialSource, Mode, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Computation(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Computation(_) | Self::Io(_) => 1,
        }
    }
}

/// Runs the configured mode and returns its report.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    match config.mode {
        Mode::Force => cmd_force(config),
        Mode::Factor => cmd_factor(config),
        Mode::Compare => cmd_compare(config),
        Mode::Fit => cmd_fit(config),
        Mode::Verify => cmd_verify(config),
    }
}

fn single_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `args`, runs, writes the report and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let message = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "error: {}", single_line(message));
            return 2;
        }
    };
    match run_cli(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", single_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let config = RunConfig::from_cli(cli)?;
    for warning in config.geometry_warnings() {
        writeln!(stderr, "warning: {warning}")?;
    }
    let report = execute(&config)?;
    match &config.output {
        Some(path) => std::fs::write(path, &report.text)?,
        None => stdout.write_all(report.text.as_bytes())?,
    }
    if report.failures > 0 {
        let what = if config.mode == Mode::Verify {
            "checks"
        } else {
            "rows"
        };
        return Err(CliError::Computation(format!(
            "{} {what} failed",
            report.failures
        )));
    }
    Ok(0)
}
