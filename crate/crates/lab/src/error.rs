use std::path::PathBuf;

use displaced_core::Error as CoreError;

/// Process exit status for validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit status when an optimizer or integrator did not converge.
pub const EXIT_CONVERGENCE: i32 = 3;
/// Process exit status for IO failures.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<LabError>,
    },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Format { path: path.into(), message: message.to_string() }
    }

    pub fn stage(stage: impl Into<String>, source: LabError) -> Self {
        Self::Stage { stage: stage.into(), source: Box::new(source) }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(CoreError::EnergyDrift { .. } | CoreError::Unsettled { .. }) | Self::Convergence(_) => {
                EXIT_CONVERGENCE
            }
            Self::Core(_) | Self::Validation(_) | Self::Format { .. } => EXIT_VALIDATION,
            Self::Io { .. } => EXIT_IO,
            Self::Stage { source, .. } => source.exit_code(),
        }
    }
}
