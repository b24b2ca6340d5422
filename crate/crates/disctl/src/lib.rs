//! Command implementations behind the `disctl` binary.
//!
//! Every command writes its outputs plus a manifest recording the full
//! parameter set, input and output hashes and stage timings; `replay`
//! re-runs a manifest and checks the outputs are reproduced byte for byte.

pub mod cli;
mod commands;
pub mod manifest;

use std::path::Path;

pub use cli::Cli;
pub use commands::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("replay differs from the manifest: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// 2 usage, 3 numerical infeasibility or failed reproduction, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) | CliError::Mismatch(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<extract::ExtractError> for CliError {
    fn from(e: extract::ExtractError) -> Self {
        use extract::ExtractError::*;
        match e {
            AllKnotsInfeasible | Sdp(_) | Mat(_) | Envelope(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<security::SecurityError> for CliError {
    fn from(e: security::SecurityError) -> Self {
        match e {
            security::SecurityError::UnreachableTarget(_) => CliError::Infeasible(e.to_string()),
            security::SecurityError::Extract(inner) => inner.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<simproto::SimError> for CliError {
    fn from(e: simproto::SimError) -> Self {
        match e {
            simproto::SimError::Io(io) => CliError::Io { path: "simulation output".into(), message: io.to_string() },
            _ => CliError::Usage(e.to_string()),
        }
    }
}
