use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("unsupported size: n = {n} ({what} supports {min}..={max})")]
    UnsupportedSize {
        what: &'static str,
        n: usize,
        min: usize,
        max: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("failed to converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// An exact-arithmetic identity failed; indicates a bug upstream.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("no vanishing coefficient exists for n = {0}")]
    NoZeroCoefficient(usize),

    #[error("cache integrity error at byte offset {offset}: {reason}")]
    Integrity { offset: u64, reason: String },

    #[error("cache version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the caller's input rather than a defect.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Inconsistent(_))
    }
}
