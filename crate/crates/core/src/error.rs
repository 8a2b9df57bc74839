use alloc::string::String;

/// Errors raised by the estimation kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-positive value {value} at position {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("estimator failed on {failed} of {total} bootstrap resamples")]
    BootstrapFailure { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn degenerate(reason: impl Into<String>) -> Self {
        Error::Degenerate(reason.into())
    }

    /// True for failures caused by the shape of the data rather than by
    /// bad arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::BootstrapFailure { .. } | Error::TooFewPoints { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
