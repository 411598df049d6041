//! Sparse linear algebra: compressed-row matrices, a pivoted direct solver and
//! 2-norm condition numbers.

mod condition;
mod matrix;
mod solve;

pub use condition::{condition_number, CondMode, DENSE_SVD_MAX_ROWS};
pub use matrix::SparseMatrix;
pub use solve::{solve, LinearSystem, LuFactorization, RESIDUAL_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("matrix is singular to working precision ({detail})")]
    SingularMatrix { detail: String },
    #[error("relative residual {residual:.3e} exceeds tolerance after refinement")]
    InaccurateSolution { residual: f64 },
    #[error("matrix has {rows} rows; dense SVD is limited to {limit}")]
    TooLargeForDense { rows: usize, limit: usize },
    #[error("factorization backend failed: {0}")]
    Backend(String),
}
