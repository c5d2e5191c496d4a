use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the grasp ranking pipeline.
#[derive(Debug, Error)]
pub enum CageError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: label `{label}` is not in the {set} vocabulary")]
    Vocabulary {
        line: usize,
        set: &'static str,
        label: String,
    },

    #[error("unknown {set} label `{label}`")]
    UnknownLabel { set: &'static str, label: String },

    #[error("line {line}: context `{context}` references unknown object `{object}`")]
    DanglingObject {
        line: usize,
        context: String,
        object: String,
    },

    #[error("line {line}: orientation quaternion has norm {norm}, expected 1")]
    QuaternionNorm { line: usize, norm: f64 },

    #[error("invalid dataset: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("optimizer timestep overflow")]
    TimestepOverflow,

    #[error("insufficient data for split: {0}")]
    InsufficientData(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T, E = CageError> = std::result::Result<T, E>;

impl CageError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CageError::Io {
            path: path.into(),
            source,
        }
    }
}
