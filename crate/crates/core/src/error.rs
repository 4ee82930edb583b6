use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision error: relative error {achieved:.3e} above target {target:.3e} at {bits} bits")]
    Precision { achieved: f64, target: f64, bits: usize },

    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("cache format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("cross-check mismatch: {0}")]
    Mismatch(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::Precision { .. } | Error::Convergence(_) => 3,
            Error::Format { .. } | Error::Io(_) => 4,
            Error::Mismatch(_) => 5,
            Error::Internal(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
