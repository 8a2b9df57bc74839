use std::path::Path;

/// Failures of the std layer, sorted by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad flags, config values or unknown presets. Exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input and missing artifacts. Exit code 2.
    #[error("{0}")]
    Data(String),
    /// Degenerate data that defeats an estimator. Exit code 3.
    #[error("{0}")]
    Numerical(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<AppError>,
    },
}

pub type Result<T> = std::result::Result<T, AppError>;

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn stage(self, stage: &'static str) -> Self {
        match self {
            e @ AppError::Stage { .. } => e,
            e => AppError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        AppError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<patchscale_core::Error> for AppError {
    fn from(e: patchscale_core::Error) -> Self {
        use patchscale_core::Error as E;
        match e {
            E::InvalidParameter { .. } => AppError::Usage(e.to_string()),
            E::NonPositive { .. } => AppError::Data(e.to_string()),
            _ => AppError::Numerical(e.to_string()),
        }
    }
}
