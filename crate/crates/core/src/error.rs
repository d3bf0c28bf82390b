use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site index {index} out of range for {num_sites} sites")]
    SiteOutOfRange { index: usize, num_sites: usize },
    #[error("gate targets must be distinct, got {0} twice")]
    DuplicateTarget(usize),
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {dim} exceeds dense-matrix cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown family tag `{0}`")]
    UnknownFamily(String),
    #[error("term {0} acts on more than two sites")]
    NotTwoLocal(String),
    #[error("parameterized gate is not a Pauli rotation: {0}")]
    NonPauliParameter(String),
    #[error("dataset mode mismatch: {0}")]
    ModeMismatch(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("training diverged at epoch {epoch}: cost {cost:e} exceeds {limit:e}")]
    Divergence { epoch: usize, cost: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
