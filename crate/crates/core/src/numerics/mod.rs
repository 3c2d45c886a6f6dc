//! Dense linear algebra, quadrature and random sampling.

mod linalg;
mod quadrature;
mod rng;

pub use linalg::{
    finite_vector, sym_eig_min, sym_eigen, SymEigen, SymMatrix, Vector, DENSE_MAX_DIM,
};
pub use quadrature::{integrate_reciprocal, DEFAULT_QUAD_TOL, MAX_QUAD_DEPTH};
pub use rng::{derive_stream, sample_uniform_ball, RngState};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("vector entry {index} is not finite ({value})")]
    NonFiniteVector { index: usize, value: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFiniteMatrix { row: usize, col: usize },
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("dimension {dim} exceeds the dense limit {max}")]
    DimensionExceeded { dim: usize, max: usize },
    #[error("empty matrix")]
    Empty,
    #[error("integrand is not positive at v = {at} (value {value})")]
    NonPositiveIntegrand { at: f64, value: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("quadrature did not converge within {depth} bisections near v = {at}")]
    QuadratureDiverged { depth: usize, at: f64 },
}
