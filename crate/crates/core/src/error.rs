use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid entity id `{0}`")]
    BadId(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown informal edge `{0} ~> {1}`")]
    UnknownEdge(String, String),
    #[error("bad entry set: {0}")]
    BadEntry(String),
    #[error("mood mappings cover different entities: {0}")]
    DiffDomain(String),
    #[error("duplicate scenario name `{0}`")]
    DupScenario(String),
    #[error("model is invalid ({} diagnostics)", .0.len())]
    Invalid(Vec<Diagnostic>),
}

impl Error {
    pub fn code(&self) -> Code {
        match self {
            Error::BadId(_) => Code::BadId,
            Error::UnknownEntity(_) => Code::UnknownEntity,
            Error::UnknownEdge(..) => Code::UnknownEdge,
            Error::BadEntry(_) => Code::BadEntry,
            Error::DiffDomain(_) => Code::DiffDomain,
            Error::DupScenario(_) => Code::DupScenario,
            Error::Invalid(diags) => diags.first().map_or(Code::Syntax, |d| d.code),
        }
    }

    /// Flattens the error into diagnostics for reporting.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            Error::Invalid(diags) => diags.clone(),
            other => vec![Diagnostic::new(other.code(), other.to_string(), None)],
        }
    }
}
