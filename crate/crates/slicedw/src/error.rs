use thiserror::Error;

/// Error variants shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The operation is only defined for a restricted configuration
    /// (e.g. uniform equal-size measures for support gradients).
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// A numerical-domain violation (non-PSD covariance, negative variance
    /// beyond tolerance, ...).
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// An instance exceeds a built-in resource guard.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A measure file failed to parse. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
