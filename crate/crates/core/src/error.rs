use thiserror::Error;

/// Errors raised across the screening pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("network is disconnected: bus {bus} is unreachable from the reference bus")]
    DisconnectedNetwork { bus: usize },

    #[error("reduced network matrix is numerically singular (pivot {pivot:.3e})")]
    SingularNetwork { pivot: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("negative load {value} at bus {bus}, timestep {timestep}")]
    NegativeLoad {
        bus: usize,
        timestep: usize,
        value: f64,
    },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("solution is not optimal (status {0})")]
    NotOptimal(String),

    #[error("invalid fixing: {0}")]
    InvalidFix(String),

    #[error("schedule does not cover {0}")]
    ScheduleCoverage(String),

    #[error("value {value} outside allowed range {range}")]
    InvalidRange { value: f64, range: &'static str },

    #[error("screening result does not cover the instance: {0}")]
    Coverage(String),

    #[error("screening results are over different target universes: {0}")]
    UniverseMismatch(String),

    #[error("training set is empty or smaller than K={0}")]
    EmptyTraining(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("oracle problem too large: {binaries} binaries (limit {limit})")]
    TooLarge { binaries: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
