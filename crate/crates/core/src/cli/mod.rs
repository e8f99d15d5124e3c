//! Command-line front end: configuration, command dispatch and result output.
//!
//! Exit codes: 0 success, 1 internal, 2 parse, 3 validation, 4 I/O.

mod commands;
mod config;
mod table;

pub use commands::{default_tomography_grid, execute, Command, Execution};
pub use config::{
    config_digest, parse_config, CalibrationConfig, DetectionConfig, ExperimentConfig, GatePreset,
    GateStateConfig, ParsedConfig, RunConfig, SweepConfig, TomographyConfig,
};
pub use table::{format_float, render, write_results, OutputFormat, ResultTable, Value};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration syntax error: {0}")]
    Parse(String),

    #[error("invalid configuration at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation { .. } => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
