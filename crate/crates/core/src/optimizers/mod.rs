//! The five algorithms as decrease procedures, with parameter builders.
//!
//! Every builder takes a `scale` multiplier (1 reproduces the theory values).
//! Scaling enlarges the step size and, for block methods, shortens the block
//! by the same factor so the block horizon `η·K₀` is preserved. Verification
//! of theoretical inequalities always uses the unscaled values.

mod adaptive_gd;
mod gd;
mod perturbed_gd;
mod restarted_sgd;
mod sgd;

pub use adaptive_gd::{adaptive_gd_procedure, build_adaptive_gd, AdaptiveGdParams, AdaptiveGdProcedure};
pub use gd::{build_gd, gd_procedure, GdParams, GdProcedure};
pub use perturbed_gd::{
    build_perturbed_gd, perturbed_gd_procedure, Branch, PerturbedGdParams, PerturbedGdProcedure,
    DEFAULT_C,
};
pub use restarted_sgd::{
    build_restarted_sgd, restarted_sgd_procedure, RestartedSgdParams, RestartedSgdProcedure,
};
pub use sgd::{build_sgd, sgd_procedure, SgdParams, SgdProcedure};

use thiserror::Error;

use crate::calculus::CalculusError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("parameters infeasible: {0}")]
    Infeasible(String),
    #[error("parameter fixed point did not converge in {0} iterations")]
    NonConvergence(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("oracle kind {0} is not supported here")]
    WrongOracle(&'static str),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

pub(crate) fn check_scale(scale: f64) -> Result<(), OptimizerError> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(OptimizerError::InvalidArgument(format!(
            "scale must be positive and finite, got {scale}"
        )))
    }
}

pub(crate) fn check_unit_interval(name: &str, x: f64) -> Result<(), OptimizerError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(OptimizerError::InvalidArgument(format!(
            "{name} must lie in (0, 1), got {x}"
        )))
    }
}
