//! Experiment runner for entanglement-asymmetry scans of spin-chain eigenstates.

pub mod commands;
pub mod config;
pub mod output;

use std::process::ExitCode;

use entasym_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSize(_) | Error::InvalidInput(_) => CliError::Config(e.to_string()),
            Error::ResourceLimit(_) => CliError::Resource(e.to_string()),
            Error::Degenerate(_) | Error::FitFailure(_) | Error::Numerical(_) => CliError::Numerical(e.to_string()),
            Error::Cache(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
