use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: duplicate record id {id:?} (line {line})", path.display())]
    DuplicateId { path: PathBuf, id: String, line: usize },

    #[error("{}: corrupt model at line {line} (byte offset {offset}): {reason}", path.display())]
    CorruptModel {
        path: PathBuf,
        line: usize,
        offset: usize,
        reason: String,
    },

    #[error("{}: model format version mismatch: file is {found}, expected {expected}", path.display())]
    VersionMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("{}: line {line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("training produced an empty vocabulary")]
    EmptyVocabulary,

    #[error("unknown database {0:?}")]
    UnknownDatabase(String),

    #[error("record {0:?} has no gold label entry")]
    MissingGold(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad parameters rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidConfig(_))
    }
}
