//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by library operations.
///
/// Low-level arithmetic preconditions (mixing ambients or moduli) are
/// programming errors and panic instead; see the individual ops.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be a prime greater than 3, got {0}")]
    InvalidPrime(u64),

    #[error("inversion of zero modulo {0}")]
    ZeroInversion(u64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("linear map is not invertible")]
    NotInvertible,

    #[error("bracket not preserved on basis pair ({i}, {j})")]
    BracketViolation { i: usize, j: usize },

    #[error("map does not preserve the degree filtration at basis index {0}")]
    FiltrationViolation(usize),

    #[error("p-th power of the adjoint map is nonzero")]
    NotNilpotent,

    #[error("element lies outside the algebra span: {0}")]
    OutsideSpan(String),

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("structural failure: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
