use std::path::PathBuf;

/// Errors surfaced by the pipeline and the command line.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage '{stage}' failed: {cause}")]
    StageFailed { stage: String, cause: String },
    #[error("acceptance checks failed: {0}")]
    AcceptanceFailed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed artifact {path}: {reason}")]
    Artifact { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] donut_core::Error),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::AcceptanceFailed(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        CliError::Artifact {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    /// Wraps any error as a failure of `stage`, keeping config errors as they are.
    pub(crate) fn in_stage(self, stage: &str) -> Self {
        match self {
            e @ (CliError::Config(_) | CliError::StageFailed { .. }) => e,
            other => CliError::StageFailed {
                stage: stage.to_string(),
                cause: other.to_string(),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
