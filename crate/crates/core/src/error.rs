//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error in polynomial `{text}`: {msg}")]
    PolynomialSyntax { text: String, msg: String },

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not a well-formed module map: {0}")]
    IllFormedMap(String),

    #[error("ill-formed complex: differentials do not compose to zero at position {position}")]
    IllFormedComplex { position: usize },

    #[error("not a chain map: square at position {position} does not commute")]
    NotChainMap { position: usize },

    #[error("localization is empty: {0}")]
    EmptyLocalization(String),

    #[error("element is nilpotent in the ring: {0}")]
    NilpotentElement(String),

    #[error("inconsistent sheaf data: {0}")]
    InconsistentSheaf(String),

    #[error("charts do not cover the space: {0}")]
    CoverIncomplete(String),

    #[error("cocycle condition fails on triple ({0}, {1}, {2})")]
    CocycleFailure(usize, usize, usize),

    #[error("relations are not homogeneous for the given grading")]
    InhomogeneousRelations,

    #[error("module does not have finite length")]
    InfiniteLength,

    #[error("no right inverse over the ring; try localizing at {hint}")]
    NoRightInverse { hint: String },

    #[error("module lift is infeasible: {0}")]
    LiftInfeasible(String),

    #[error("exactness failure: {0}")]
    NotExact(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
