//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the library.
///
/// `InvalidArgument` flags caller mistakes that are detectable before any
/// numerics run (bad sizes, out-of-range parameters). `Domain` flags an
/// evaluation outside the mathematical domain of an operation. `Numeric`
/// flags an internal algorithm that failed to converge or produced
/// non-finite intermediates. `Data` flags malformed external input
/// (non-finite samples, corrupt files).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("singular operator: multiplier {multiplier:e} at mode {mode:?}")]
    SingularOperator { mode: Vec<usize>, multiplier: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Convenience constructor for `InvalidArgument`.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Convenience constructor for `Domain`.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Convenience constructor for `Numeric`.
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Convenience constructor for `Data`.
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
