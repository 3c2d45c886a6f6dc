use crate::calculus::EffectiveConstants;
use crate::framework::{Advance, DecreaseProcedure};
use crate::numerics::{RngState, Vector};
use crate::problems::Objective;

use super::{check_scale, OptimizerError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdParams {
    pub eta: f64,
    /// `L₁(w₀)`, which fixes the promised decrease `ε²/(2L₁)`.
    pub l1: f64,
}

/// `η = scale/L₁(w₀)`.
pub fn build_gd(consts: &EffectiveConstants, scale: f64) -> Result<GdParams, OptimizerError> {
    check_scale(scale)?;
    Ok(GdParams {
        eta: scale / consts.l1,
        l1: consts.l1,
    })
}

/// One gradient step per invocation; the candidate is the starting point.
#[derive(Debug, Clone)]
pub struct GdProcedure {
    obj: Objective,
    params: GdParams,
    eps: f64,
}

pub fn gd_procedure(obj: Objective, params: GdParams, eps: f64) -> GdProcedure {
    GdProcedure { obj, params, eps }
}

impl GdProcedure {
    pub fn params(&self) -> &GdParams {
        &self.params
    }
}

impl DecreaseProcedure for GdProcedure {
    fn objective(&self) -> &Objective {
        &self.obj
    }

    fn advance(&mut self, u0: &Vector, _rng: &mut RngState) -> Advance {
        let g = self.obj.gradient(u0);
        Advance {
            next: u0 - g * self.params.eta,
            intermediates: vec![u0.clone()],
            oracle_calls: 1,
            value_evals: 0,
        }
    }

    fn delta(&self, _u0: &Vector) -> f64 {
        self.eps * self.eps / (2.0 * self.params.l1)
    }

    fn t_oracle(&self, _u0: &Vector) -> u64 {
        1
    }
}
