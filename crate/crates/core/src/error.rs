use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid rule pattern {pattern:?}")]
    Rule {
        pattern: String,
        #[source]
        source: regex::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("feature extraction failed for {id}: {reason}")]
    Features { id: String, reason: String },

    #[error("training failed: {0}")]
    Training(String),

    #[error("model expects {expected} features, input has {found}")]
    Arity { expected: usize, found: usize },

    #[error("cannot rank against an empty candidate list")]
    NoCandidates,

    #[error("missing annotation rows for: {}", .0.join(", "))]
    MissingAnnotations(Vec<String>),

    #[error("no record for candidate {0}")]
    MissingRecord(String),

    #[error("invalid url {url:?}: {reason}")]
    Url { url: String, reason: String },

    #[error("stage `{stage}` failed")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
