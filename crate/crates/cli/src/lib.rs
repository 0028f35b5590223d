//! Experiment runner behind the `chronocorr` binary: configuration, γt sweeps,
//! CSV and SVG output.

pub mod config;
pub mod output;
pub mod plot;
pub mod sweep;

use std::fmt;

pub use config::{Column, ConfigError, ExperimentConfig, Grid, InitialState};
pub use sweep::{run_sweep, SweepRow, SweepTable};

/// Exit status for configuration and input errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for file system errors.
pub const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<chronocorr::Error> for CliError {
    fn from(e: chronocorr::Error) -> Self {
        use chronocorr::Error as E;
        match e {
            E::Solver { .. } | E::Numerical { .. } | E::EigenConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
