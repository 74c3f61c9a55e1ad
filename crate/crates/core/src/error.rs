use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: qubit index {index} out of range for {n_qubits}-qubit circuit")]
    Width { line: usize, index: usize, n_qubits: usize },

    #[error("setting {setting} outside 1..={m}")]
    SettingOutOfRange { setting: usize, m: usize },

    #[error("observable power {power} outside 1..={max}")]
    PowerOutOfRange { power: usize, max: usize },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("incomplete input: missing outcome distribution for setting pair ({x}, {y})")]
    IncompleteInput { x: usize, y: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
