//! Error classes and their process exit codes.

use std::path::PathBuf;

use thiserror::Error;
use wghp_core::assembly::AssemblyError;
use wghp_core::problem::ProblemError;
use wghp_core::verify::VerifyError;

/// Process exit codes, one per error class.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Unknown flag, missing or out-of-range value, malformed config file.
    pub const USAGE: i32 = 2;
    /// Coefficient or manufactured-solution expression does not parse.
    pub const SYNTAX: i32 = 3;
    /// Expression evaluation failure or violated problem assumption.
    pub const PROBLEM: i32 = 4;
    /// Singular or inaccurate linear solve.
    pub const NUMERICAL: i32 = 5;
    /// File could not be read or written.
    pub const IO: i32 = 6;
    /// A sweep finished but some cases failed.
    pub const PARTIAL: i32 = 7;
    /// At least one check suite failed.
    pub const CHECK_FAILED: i32 = 8;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file {path}, line {line}: {message}")]
    ConfigFile { path: PathBuf, line: usize, message: String },
    #[error("syntax error in {field}: {message}")]
    Syntax { field: &'static str, message: String },
    #[error("{0}")]
    Problem(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::ConfigFile { .. } => exit::USAGE,
            CliError::Syntax { .. } => exit::SYNTAX,
            CliError::Problem(_) => exit::PROBLEM,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Parse { field, source } => CliError::Syntax { field, message: source.to_string() },
            e @ ProblemError::EpsilonOutOfRange { .. } => CliError::Usage(e.to_string()),
            other => CliError::Problem(other.to_string()),
        }
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        match e {
            AssemblyError::Linalg(_) | AssemblyError::Inaccurate { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Problem(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Parse(p) => CliError::Syntax { field: "manufactured-u", message: p.to_string() },
            VerifyError::Problem(p) => p.into(),
            VerifyError::Assembly(a) => a.into(),
            other => CliError::Problem(other.to_string()),
        }
    }
}
