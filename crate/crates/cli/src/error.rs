use std::fmt;

use qosc::Error;

/// Failure of a subcommand, carrying its exit code class.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad invocation, configuration or data file (exit 2).
    Usage(String),
    /// A computation that ran but could not complete (exit 1).
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Structure { .. } | Error::Asymmetric(_) => CliError::Compute(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
