//! Crate-wide error type.

use crate::graded::Signature;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("signature mismatch: ({0}) vs ({1})")]
    SignatureMismatch(Signature, Signature),

    #[error("expected a homogeneous vector field: {0}")]
    NotHomogeneous(String),

    #[error("wrong degree: expected {expected}, found {found}")]
    WrongDegree { expected: String, found: String },

    #[error("vector field is not homological: [Q,Q] has nonzero coefficient {witness}")]
    NotHomological { witness: String },

    #[error("the given sections do not form a frame: {0}")]
    NotAFrame(String),

    #[error("connection is not well defined on the quotient: {0}")]
    IllDefinedConnection(String),

    #[error("no flat frame available: {0}")]
    NoFlatFrame(String),

    #[error("unsupported reduction setting: {0}")]
    UnsupportedSetting(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("internal consistency failure (this indicates invalid input data or a bug): {0}")]
    InternalConsistency(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unresolved reference: {0}")]
    UnresolvedReference(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
