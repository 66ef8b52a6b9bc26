//! CLI error taxonomy: usage errors exit 1, runtime errors exit 2.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration; exit code 1.
    Usage(String),
    /// Failure while running: I/O, instance files, algorithm errors;
    /// exit code 2.
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: String) -> Self {
        CliError::Usage(msg)
    }

    pub fn runtime(msg: String) -> Self {
        CliError::Runtime(msg)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {}", m),
            CliError::Runtime(m) => write!(f, "error: {}", m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<histotest_core::Error> for CliError {
    fn from(e: histotest_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
