use std::path::PathBuf;

use thiserror::Error;

use crate::model::Label;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("classifier {classifier} has no {label} training scores")]
    EmptyClass { classifier: usize, label: Label },

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate counts: {0}")]
    DegenerateCounts(&'static str),

    #[error("invalid ROC: {0}")]
    InvalidRoc(String),

    #[error("EER of classifier {0} is zero, inverse-EER weight is undefined")]
    ZeroEer(usize),

    #[error("invalid EER {eer} for classifier {classifier}: must lie in (0, 0.5]")]
    EerOutOfRange { classifier: usize, eer: f64 },

    #[error("classifier {0} has a degenerate min-max range (min == max)")]
    DegenerateRange(usize),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: u64,
        column: usize,
        reason: String,
    },

    #[error("missing or malformed header: {0}")]
    MissingHeader(String),

    #[error("empty file")]
    EmptyFile,

    #[error("unsupported model document: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
