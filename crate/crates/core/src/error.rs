use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("stage count {m} exceeds the supported maximum {max}")]
    Capacity { m: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("not a bijection: {0}")]
    NotBijection(String),

    #[error("not a permutation matrix")]
    NotPermutationMatrix,

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("index sets overlap at index {0}")]
    Overlap(usize),

    #[error("infeasible: eligible set has {eligible} indices, {k} required")]
    Infeasible { eligible: usize, k: usize },

    #[error("no feasible permutation among {0} candidates")]
    NoFeasiblePermutation(usize),

    #[error("selection incompatible with the automorphism structure: {0}")]
    IncompatibleSelection(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("malformed encoding: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
