use thiserror::Error;

/// Errors raised by state construction, channel validation and the roof optimizer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("matrix is not Hermitian: |rho[{row}][{col}] - conj(rho[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("entry [{row}][{col}] is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("rank {rank} out of range 1..={dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("Kraus set is not complete: max |sum K^dag K - I| = {residual:e}")]
    IncompleteKraus { residual: f64 },

    #[error("Kraus set is empty")]
    EmptyKraus,

    #[error("invalid FSIO factors: sum_n |a_ii^(n)|^2 = {sum} at index {index}")]
    InvalidFactors { index: usize, sum: f64 },

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("convex-roof optimizer failed: no restart converged (best value {best:e})")]
    OptimizerFailure { best: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
