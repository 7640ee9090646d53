use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped by the CLI exit-code contract: domain errors (1),
/// usage and parse errors (2), budget errors (3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("system is unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Process exit code for this error under the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unsatisfiable(_) | Error::Assumption(_) | Error::Unsupported(_) => 1,
            Error::Parse { .. } | Error::Invalid(_) => 2,
            Error::Budget(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
