use alloc::string::String;
use core::fmt;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    Domain(String),
    /// A numerical procedure missed its tolerance. `estimate` is the achieved
    /// error estimate (or residue) that triggered the failure.
    Numerical { message: String, estimate: f64 },
    /// A request exceeds a size cap. `required` carries the size that would
    /// have been needed, when known.
    Resource {
        message: String,
        required: Option<u64>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    pub(crate) fn numerical(message: impl Into<String>, estimate: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            estimate,
        }
    }

    pub(crate) fn resource(message: impl Into<String>, required: Option<u64>) -> Self {
        Error::Resource {
            message: message.into(),
            required,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numerical { message, estimate } => {
                write!(f, "numerical error: {message} (estimate {estimate:e})")
            }
            Error::Resource { message, required } => match required {
                Some(r) => write!(f, "resource limit: {message} (required {r})"),
                None => write!(f, "resource limit: {message}"),
            },
        }
    }
}

impl core::error::Error for Error {}
