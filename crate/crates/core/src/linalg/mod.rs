//! Sparse and dense numeric kernels shared by the LARS and proximal solvers.
//!
//! Everything that touches the weighted incidence matrix at scale goes through
//! [`SparseMatrix`]; the small active-set systems of the homotopy solver use
//! [`DenseMatrix`] and [`min_norm_least_squares`].

mod cg;
mod cholesky;
mod counter;
mod dense;
mod ordering;
mod sparse;

pub use cg::{pcg, CgReport};
pub use cholesky::CholeskyFactor;
pub use counter::OpCounter;
pub use dense::{min_norm_least_squares, DenseMatrix};
pub use ordering::minimum_degree_order;
pub use sparse::{gram_nn, SparseMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("conjugate gradients did not converge: {0:?}")]
    NotConverged(CgReport),
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
