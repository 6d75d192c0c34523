//! Dense vectors, compressed sparse matrices and spectral-norm estimation.

mod norm;
mod sparse;
mod vector;

pub use norm::{operator_norm, operator_norm_from, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use sparse::SparseMatrix;
pub use vector::{axpy, dot, kernels, norm, Vector};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("norm estimate did not converge after {iterations} iterations (estimate {estimate}, residual {gap})")]
    NormEstimate {
        estimate: f64,
        gap: f64,
        iterations: usize,
    },
}
