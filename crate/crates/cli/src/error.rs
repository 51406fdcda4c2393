use std::fmt;

use historic::LabError;

/// Failure of a CLI run, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration (exit 2).
    Config(String),
    /// An operation failed on valid input (exit 3).
    Failure { context: String, source: LabError },
    /// Output could not be written (exit 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure { .. } | CliError::Io(_) => 3,
        }
    }

    /// Wraps a library error raised while building inputs from descriptions.
    pub fn invalid(field: &str) -> impl FnOnce(LabError) -> CliError + '_ {
        move |e| CliError::Config(format!("field `{field}`: {e}"))
    }

    /// Wraps a library error raised by the operation itself.
    pub fn failed(context: &str) -> impl FnOnce(LabError) -> CliError + '_ {
        move |source| CliError::Failure {
            context: context.to_string(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Failure { context, source } => write!(f, "{context}: {source}"),
            CliError::Io(msg) => write!(f, "output error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
