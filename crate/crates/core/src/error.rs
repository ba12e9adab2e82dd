use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is not connected: {0}")]
    DisconnectedGraph(String),

    #[error("invalid edge: {0}")]
    InvalidEdge(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("matrix is not Schur stable: {0}")]
    NotSchur(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("expected a simple zero eigenvalue, found {count} near-zero eigenvalues")]
    MultipleZeroEigenvalues { count: usize },

    #[error("matrix has no non-zero eigenvalue")]
    NoNonzeroEigenvalue,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("KKT system is singular")]
    SingularKkt,

    #[error("pseudo-gradient is not strongly monotone (mu = {mu:e})")]
    NotStronglyMonotone { mu: f64 },

    #[error("unsupported objective: {0}")]
    UnsupportedObjective(String),

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("degenerate topology: {0}")]
    DegenerateTopology(String),

    #[error("state diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
