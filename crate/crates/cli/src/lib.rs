//! Command-line front end for the `j1j2` library: run configuration, the
//! `spectrum` / `sweep` / `crossings` / `validate` commands and their
//! CSV and JSON outputs.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use config::{ConfigErrors, Format, Observable, RunConfig};

/// Failure classes, each with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Validation suite breach (exit 1).
    Validation(String),
    /// Bad arguments, configuration or I/O (exit 2).
    Usage(String),
    /// Solver or measure failure (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigErrors> for CliError {
    fn from(e: ConfigErrors) -> Self {
        CliError::Usage(format!("invalid configuration:\n{e}"))
    }
}

impl From<j1j2::Error> for CliError {
    fn from(e: j1j2::Error) -> Self {
        if e.is_argument() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
