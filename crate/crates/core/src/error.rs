use thiserror::Error;

/// Errors produced by the numerical kernels and the embedding integrator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is numerically singular: pivot {pivot:e} at column {column}")]
    Singular { pivot: f64, column: usize },

    #[error("eigensolver did not converge within {sweeps} Jacobi sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds tolerance")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {value:e} below tolerance")]
    NotPsd { value: f64 },

    #[error(
        "corner enumeration needs {needed} matrices, above the cap of {cap}; \
         no interval eigenvalue fallback is available, coarsen the enclosure \
         or raise the cap"
    )]
    CornerBudget { needed: u128, cap: usize },

    #[error("center lies outside the box in coordinate {coordinate}")]
    CenterOutsideBox { coordinate: usize },

    #[error("{order:?} is not a permutation of 0..{dim}")]
    NotAPermutation { order: Vec<usize>, dim: usize },

    #[error("operation requires a {expected} set")]
    WrongSetKind { expected: &'static str },

    #[error("dimension mismatch: {context}")]
    Dimension { context: String },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("evaluation produced a non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("integration aborted at step {step}: {cause}")]
    Aborted { step: usize, cause: String },
}

pub type Result<T> = std::result::Result<T, Error>;
