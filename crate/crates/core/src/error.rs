use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("undefined AUC: the {0} score set is empty")]
    UndefinedAuc(&'static str),

    #[error("empty class: class {0} has no examples")]
    EmptyClass(usize),

    #[error("undefined recall: no positive examples")]
    UndefinedRecall,

    #[error("degenerate batch: {present} class(es) present, at least 2 are required")]
    DegenerateBatch { present: usize },

    #[error("loss starved in epoch {epoch}: every minibatch was degenerate; enable stratified batching")]
    LossStarved { epoch: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document")]
    Document(#[from] serde_json::Error),

    #[error("run {run} failed")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
