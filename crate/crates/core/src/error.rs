use std::path::PathBuf;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series '{0}' has no metadata row")]
    MissingMeta(String),
    #[error("series '{id}' has a non-finite value at index {index}")]
    NonFiniteValue { id: String, index: usize },
    #[error("series '{id}' has an empty interior cell at index {index}")]
    EmptyCell { id: String, index: usize },
    #[error("series '{0}' has fewer than 3 observations")]
    TooShort(String),
    #[error("series '{0}' is too short to hold out a full horizon")]
    TooShortForSplit(String),
    #[error("invalid value in {field}: '{value}'")]
    Parse { field: &'static str, value: String },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("MASE scale is zero (in-sample seasonal differences are all zero)")]
    DegenerateScale,
    #[error("MASE needs more observations than the seasonal period (n = {n}, m = {m})")]
    NMustExceedM { n: usize, m: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("model has not been trained")]
    UntrainedModel,
    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    DivergenceDetected { epoch: usize, loss: f64 },
    #[error("series '{id}' is missing its {part}")]
    MissingPart { id: String, part: &'static str },
    #[error("negative weighting loss {0} indicates a solver fault")]
    NegativePLoss(f64),
    #[error("permutation importance needs at least two series")]
    SingleSeriesCorpus,
    #[error("series '{0}' is not present in both result sets")]
    UnpairedSeries(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
