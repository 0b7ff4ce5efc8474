use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("input {value} outside the unit interval [0, 1]")]
    OutsideUnitInterval { value: f64 },

    #[error("more nodes than motes: {nodes} nodes, {motes} distinct motes")]
    MoreNodesThanMotes { nodes: usize, motes: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("series of length {len} is shorter than window length {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("no rule fired")]
    NoRuleFired,

    #[error("invalid calibration: min {min} must be below max {max} and both finite")]
    InvalidCalibration { min: f64, max: f64 },

    #[error("config error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("model file format error: {0}")]
    ModelFormat(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
