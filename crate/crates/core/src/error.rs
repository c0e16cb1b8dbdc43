use thiserror::Error;

/// Errors produced by the estimation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data (probabilities, tables) is malformed.
    #[error("data error: {0}")]
    Data(String),

    /// Operands have incompatible sizes.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The 𝔐 tensor is singular because a mode is (numerically) pure.
    #[error("singular moment tensor: symplectic eigenvalue {eigenvalue} of mode {mode} is at the vacuum bound 1/2")]
    SingularMoments { mode: usize, eigenvalue: f64 },

    /// A Fisher matrix could not be inverted.
    #[error("singular Fisher matrix; null directions {null_directions:?}")]
    SingularFisher { null_directions: Vec<Vec<f64>> },

    /// An iterative optimizer ran out of budget.
    #[error("optimizer did not converge after {evaluations} evaluations (best value {best_value}, best point {best_point:?})")]
    NoConvergence {
        evaluations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    /// A numerical invariant failed to hold.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
