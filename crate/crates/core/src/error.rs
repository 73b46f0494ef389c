use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: date {date} does not come after {previous}")]
    Ordering {
        line: u64,
        date: String,
        previous: String,
    },

    #[error("line {line}: close price {value} must be positive")]
    NonPositivePrice { line: u64, value: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("price {price} lies outside the potential table span [{lo}, {hi}]")]
    Coverage { price: f64, lo: f64, hi: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("{0}")]
    Numeric(String),
}

/// Broad classification used by the command-line front-end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters supplied by the caller.
    Usage,
    /// Input files are malformed, too short, or inconsistent.
    Data,
    /// The numerical machinery failed.
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::Ordering { .. }
            | Error::NonPositivePrice { .. }
            | Error::InsufficientData { .. }
            | Error::Coverage { .. } => ErrorKind::Data,
            Error::Domain(_) => ErrorKind::Usage,
            Error::Numeric(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
