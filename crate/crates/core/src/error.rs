use std::path::PathBuf;

use crate::esg::EsId;
use crate::ingest::TermId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A `TermId` was looked up that the dictionary never issued. This is a
    /// caller bug and is kept apart from "term not present".
    #[error("term id {0} was never issued by this dictionary")]
    UnissuedTermId(TermId),

    #[error("entity {0} is not part of the equivalence set graph")]
    UnknownEntity(TermId),

    #[error("cannot merge equivalence set {0} with itself")]
    SelfMerge(EsId),

    #[error("equivalence set {0} does not exist")]
    UnknownSet(EsId),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fixpoint stalled: cycle {cycle} did no work but queues are not empty")]
    Stalled { cycle: usize },

    #[error("storage backend error: {0}")]
    Storage(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn storage(err: impl std::fmt::Display) -> Self {
        Error::Storage(err.to_string())
    }
}
