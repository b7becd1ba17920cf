use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing required column `{0}` in header")]
    MissingColumn(String),

    #[error("{dropped} of {total} rows were malformed (more than half); first problem: {first}")]
    TooManyDropped {
        dropped: usize,
        total: usize,
        first: String,
    },

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("non-finite gradient in parameter block `{0}`")]
    NonFinite(String),

    #[error("poi index {index} out of range (vocabulary size {size})")]
    PoiOutOfRange { index: usize, size: usize },

    #[error("unknown poi `{0}`")]
    UnknownPoi(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("no eligible poi left to recommend")]
    Exhausted,

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::NonFinite(_) | Error::Diverged { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
