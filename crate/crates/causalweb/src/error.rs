//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown process '{0}'")]
    UnknownProcess(String),

    #[error("duplicate series name '{0}'")]
    DuplicateName(String),

    #[error("series '{name}' has length {len}, expected {expected}")]
    LengthMismatch {
        name: String,
        len: usize,
        expected: usize,
    },

    #[error("series '{name}' contains a non-finite value at index {index}")]
    NonFinite { name: String, index: usize },

    #[error("insufficient samples: need at least {required}, have {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    #[error("series '{0}' is degenerate (all values equal)")]
    DegenerateSeries(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{n} drivers exceed the configured cap of {cap}; the subset enumeration costs 2^N terms")]
    TooManyDrivers { n: usize, cap: usize },

    #[error("csv error in {path} at row {row}, column {col}: {msg}")]
    CsvFormat {
        path: String,
        row: usize,
        col: String,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("result schema mismatch: expected version {expected}, found {found}")]
    SchemaMismatch { expected: u32, found: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Process exit code for the CLI: 1 for input/validation problems,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::NonFinite { .. } => 2,
            _ => 1,
        }
    }
}
