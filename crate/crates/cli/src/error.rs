use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Spec { path: PathBuf, source: stein_gauge::Error },

    #[error("precondition violated: {0}")]
    Precondition(stein_gauge::Error),

    #[error(transparent)]
    Core(stein_gauge::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 3,
            CliError::Core(e) if e.is_precondition() => 3,
            _ => 2,
        }
    }
}

impl From<stein_gauge::Error> for CliError {
    fn from(e: stein_gauge::Error) -> Self {
        if e.is_precondition() {
            CliError::Precondition(e)
        } else {
            CliError::Core(e)
        }
    }
}

/// How a command that ran to completion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    CheckFailed,
    Precondition,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::CheckFailed => 1,
            Outcome::Precondition => 3,
        }
    }

    pub fn from_passed(passed: bool) -> Self {
        if passed {
            Outcome::Ok
        } else {
            Outcome::CheckFailed
        }
    }
}
