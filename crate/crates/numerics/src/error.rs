use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry ({row}, {col}) lies outside a {dim}x{dim} matrix")]
    OutOfBounds { row: usize, col: usize, dim: usize },

    #[error("zero pivot at permuted index {index} (original row {row})")]
    ZeroPivot { index: usize, row: usize },

    #[error("requested {requested} eigenpairs from a pencil of dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },

    #[error(
        "eigensolver did not converge: {converged} of {requested} pairs, worst residual {worst_residual:e}"
    )]
    NotConverged {
        converged: usize,
        requested: usize,
        worst_residual: f64,
    },

    #[error("tridiagonal eigensolver exceeded {0} iterations")]
    TridiagonalNoConvergence(usize),
}
