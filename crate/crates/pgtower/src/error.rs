use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("generator index {index} out of range 1..={ngens}")]
    GeneratorOutOfRange { index: usize, ngens: usize },

    #[error("malformed presentation: {0}")]
    Malformed(String),

    #[error("collection exceeded the guard of {0} rewriting steps (presentation is likely inconsistent)")]
    CollectionDiverged(u64),

    #[error("presentation is not consistent")]
    Inconsistent,

    #[error("presentation carries no weights or definitions; standardize it first")]
    NotStandard,

    #[error("subgroup is not normal")]
    NotNormal,

    #[error("subgroup does not contain the derived subgroup")]
    NotAboveDerived,

    #[error("layer index {n} out of range 0..={v}")]
    LayerOutOfRange { n: usize, v: usize },

    #[error("isomorphism search exceeded its budget of {0} nodes")]
    Undecided(u64),

    #[error("mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("anchor is not metabelian (derived length {0})")]
    NotMetabelian(usize),

    #[error("empty candidate set: the data contradicts the tree")]
    EmptyCandidates,

    #[error("unknown node label {0}")]
    UnknownLabel(String),

    #[error("unknown TKT name {0}")]
    UnknownTkt(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
