use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: at least 2 levels are required")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("class {class} has {available} samples but {requested} were requested for training")]
    InsufficientSamples {
        class: usize,
        available: usize,
        requested: usize,
    },

    #[error("training diverged at epoch {epoch}: {quantity} is not finite")]
    Diverged { epoch: usize, quantity: &'static str },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row} in {path}: {reason}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("unknown label {label:?} at row {row}")]
    UnknownLabel { row: usize, label: String },
}
