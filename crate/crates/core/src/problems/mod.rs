//! Objective catalog.
//!
//! Each constructor returns an [`Objective`] with analytic value, gradient and
//! (where available) Hessian, a self-bounding profile valid on the sublevel
//! sets the crate works with, and the known global minimizers.

mod log_secant;
mod monomial;
mod pca;
mod phase_retrieval;
mod quadratic;

pub use log_secant::{log_secant, LOG_SECANT_HI, LOG_SECANT_LO};
pub use monomial::{monomial_norm, MonomialNormSpec};
pub use pca::{matrix_pca, MatrixPcaSpec};
pub use phase_retrieval::{phase_retrieval, PhaseRetrievalSpec};
pub use quadratic::quadratic;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::calculus::{CalculusError, SelfBoundingProfile};
use crate::numerics::{NumericsError, SymMatrix, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("point lies outside the domain of {name}")]
    DomainViolation { name: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min})")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error("w_star must have unit norm, got {norm}")]
    NotUnit { norm: f64 },
    #[error("monomial exponent must be at least 2, got {0}")]
    UnsupportedExponent(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Analytic description of a smooth function on `ℝ^d`.
pub trait Landscape: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, w: &Vector) -> f64;
    fn gradient(&self, w: &Vector) -> Vector;
    fn hessian(&self, _w: &Vector) -> Option<SymMatrix> {
        None
    }
    fn has_hessian(&self) -> bool {
        false
    }
    fn contains(&self, _w: &Vector) -> bool {
        true
    }
}

/// An objective function together with its certified profile.
#[derive(Clone)]
pub struct Objective {
    name: String,
    params: Vec<(String, f64)>,
    landscape: Arc<dyn Landscape>,
    profile: SelfBoundingProfile,
    optima: Option<Vec<Vector>>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("params", &self.params)
            .finish()
    }
}

impl Objective {
    pub fn new(
        name: impl Into<String>,
        landscape: impl Landscape + 'static,
        profile: SelfBoundingProfile,
    ) -> Self {
        Objective {
            name: name.into(),
            params: Vec::new(),
            landscape: Arc::new(landscape),
            profile,
            optima: None,
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }

    pub fn with_optima(mut self, optima: Vec<Vector>) -> Self {
        self.optima = Some(optima);
        self
    }

    pub fn with_profile(mut self, profile: SelfBoundingProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn dim(&self) -> usize {
        self.landscape.dim()
    }

    pub fn value(&self, w: &Vector) -> f64 {
        self.landscape.value(w)
    }

    pub fn gradient(&self, w: &Vector) -> Vector {
        self.landscape.gradient(w)
    }

    pub fn hessian(&self, w: &Vector) -> Option<SymMatrix> {
        self.landscape.hessian(w)
    }

    pub fn has_hessian(&self) -> bool {
        self.landscape.has_hessian()
    }

    pub fn contains(&self, w: &Vector) -> bool {
        w.len() == self.dim() && self.landscape.contains(w)
    }

    pub fn check_domain(&self, w: &Vector) -> Result<(), ProblemError> {
        if w.len() != self.dim() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        if !self.landscape.contains(w) {
            return Err(ProblemError::DomainViolation {
                name: self.name.clone(),
            });
        }
        Ok(())
    }

    pub fn profile(&self) -> &SelfBoundingProfile {
        &self.profile
    }

    pub fn optima(&self) -> Option<&[Vector]> {
        self.optima.as_deref()
    }

    /// Euclidean distance to the nearest known minimizer.
    pub fn distance_to_optimum(&self, w: &Vector) -> Option<f64> {
        self.optima.as_ref().map(|opts| {
            opts.iter()
                .map(|o| (w - o).norm())
                .fold(f64::INFINITY, f64::min)
        })
    }
}
