use crate::calculus::EffectiveConstants;
use crate::framework::{Advance, DecreaseProcedure};
use crate::numerics::{RngState, Vector};
use crate::problems::Objective;

use super::{check_scale, OptimizerError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveGdParams {
    pub l1_prime: f64,
    pub rho0_f0p1: f64,
    pub scale: f64,
}

pub fn build_adaptive_gd(
    consts: &EffectiveConstants,
    scale: f64,
) -> Result<AdaptiveGdParams, OptimizerError> {
    check_scale(scale)?;
    if !(consts.l1_prime > 0.0 && consts.rho0_at_f0_plus1 > 0.0) {
        return Err(OptimizerError::InvalidArgument(
            "adaptive GD needs positive L1' and rho0(F0 + 1)".into(),
        ));
    }
    Ok(AdaptiveGdParams {
        l1_prime: consts.l1_prime,
        rho0_f0p1: consts.rho0_at_f0_plus1,
        scale,
    })
}

impl AdaptiveGdParams {
    /// `η = min{1/L₁′, 1/(ρ₀(F₀+1)·‖∇F‖)}` times the scale. Large gradients are
    /// clipped to step length `1/ρ₀(F₀+1)`.
    pub fn step_size(&self, grad_norm: f64) -> f64 {
        let base = 1.0 / self.l1_prime;
        let clip = if grad_norm > 0.0 {
            1.0 / (self.rho0_f0p1 * grad_norm)
        } else {
            f64::INFINITY
        };
        self.scale * base.min(clip)
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveGdProcedure {
    obj: Objective,
    params: AdaptiveGdParams,
    eps: f64,
}

pub fn adaptive_gd_procedure(obj: Objective, params: AdaptiveGdParams, eps: f64) -> AdaptiveGdProcedure {
    AdaptiveGdProcedure { obj, params, eps }
}

impl AdaptiveGdProcedure {
    pub fn params(&self) -> &AdaptiveGdParams {
        &self.params
    }
}

impl DecreaseProcedure for AdaptiveGdProcedure {
    fn objective(&self) -> &Objective {
        &self.obj
    }

    fn advance(&mut self, u0: &Vector, _rng: &mut RngState) -> Advance {
        let g = self.obj.gradient(u0);
        let eta = self.params.step_size(g.norm());
        Advance {
            next: u0 - g * eta,
            intermediates: vec![u0.clone()],
            oracle_calls: 1,
            value_evals: 0,
        }
    }

    fn delta(&self, _u0: &Vector) -> f64 {
        let p = &self.params;
        (p.l1_prime / (2.0 * p.rho0_f0p1 * p.rho0_f0p1)).min(self.eps * self.eps / (2.0 * p.l1_prime))
    }

    fn t_oracle(&self, _u0: &Vector) -> u64 {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::log_secant;

    #[test]
    fn clip_and_plain_branches() {
        let p = AdaptiveGdParams {
            l1_prime: 4.0,
            rho0_f0p1: 2.0,
            scale: 1.0,
        };
        // Small gradient: plain 1/L1'.
        assert_eq!(p.step_size(1.0), 0.25);
        assert_eq!(p.step_size(2.0), 0.25);
        assert_eq!(p.step_size(0.0), 0.25);
        // Large gradient: step length clamps to 1/rho0.
        let g = 1e6;
        assert!((p.step_size(g) * g - 0.5).abs() < 1e-15);
    }

    #[test]
    fn log_secant_monotone_descent() {
        let f = log_secant();
        let w0 = Vector::from_element(1, 0.4);
        let c = f.profile().effective_constants(f.value(&w0)).unwrap();
        let params = build_adaptive_gd(&c, 1.0).unwrap();
        let mut p = adaptive_gd_procedure(f.clone(), params, 1e-6);
        let mut rng = RngState::new(0, 0);
        let mut w = w0;
        let mut fw = f.value(&w);
        let mut steps = 0;
        while f.gradient(&w).norm() > 1e-6 {
            let g = f.gradient(&w).norm();
            assert!(params.step_size(g) * g <= 1.0 / params.rho0_f0p1 * (1.0 + 1e-15));
            w = p.advance(&w, &mut rng).next;
            let next = f.value(&w);
            assert!(next <= fw);
            fw = next;
            steps += 1;
            assert!(steps < 100_000);
        }
        assert!((w[0] + 1.0).abs() < 1e-5);
    }
}
