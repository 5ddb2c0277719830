use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid spin quantum number: {0}")]
    InvalidSpin(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("coupling table has the wrong spin tag: expected {expected}, found {found}")]
    SpinTagMismatch { expected: String, found: String },

    /// All couplings vanish: τ is infinite and n_eff undefined.
    #[error("no dynamics: every coupling is zero")]
    NoDynamics,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
