use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    ParseCell { row: usize, column: String, value: String },

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("need at least 2 distinct labels, found {0}")]
    TooFewLabels(usize),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("class {label:+} has {count} rows, fewer than k = {k}")]
    ClassTooSmall { label: i8, count: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("all sample weights are zero")]
    ZeroWeights,

    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("malformed model file, line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },

    #[error("malformed config, line {line}: {msg}")]
    ConfigFormat { line: usize, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
