use std::io;
use std::process::ExitCode;

use fraclap_core::Error as CoreError;

/// Every way a command can fail, mapped onto the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("resource limit: {message}")]
    Resource { message: String, required: Option<u64> },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("format error: {0}")]
    Format(String),
}

impl CliError {
    /// 2 validation, 3 numerical or verification, 4 resource. I/O and
    /// serialization problems are reported as 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Verification(_) => 3,
            CliError::Resource { .. } => 4,
            CliError::Io { .. } | CliError::Format(_) => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(m) => CliError::Validation(m),
            CoreError::Numerical { message, estimate } => {
                CliError::Numerical(format!("{message} (estimate {estimate:e})"))
            }
            CoreError::Resource { message, required } => {
                let message = match required {
                    Some(r) => format!("{message}; required size {r}"),
                    None => message,
                };
                CliError::Resource { message, required }
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
