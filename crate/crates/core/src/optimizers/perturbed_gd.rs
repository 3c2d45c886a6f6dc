use crate::calculus::EffectiveConstants;
use crate::framework::{Advance, DecreaseProcedure};
use crate::numerics::{sample_uniform_ball, RngState, Vector};
use crate::problems::Objective;

use super::{check_scale, check_unit_interval, OptimizerError};

/// Default universal constant `c`.
pub const DEFAULT_C: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedGdParams {
    pub c: f64,
    pub eps: f64,
    pub delta_conf: f64,
    pub d: usize,
    pub eps_tilde: f64,
    pub chi: f64,
    pub eta: f64,
    pub r: f64,
    pub g_thres: f64,
    pub f_thres: f64,
    pub t_thres: u64,
    pub l1: f64,
    pub l2: f64,
    pub scale: f64,
}

/// Scaling multiplies `η` by `scale` and divides `t_thres` by `scale²`, i.e.
/// `c` is replaced by `c·scale` in those two formulas only.
pub fn build_perturbed_gd(
    consts: &EffectiveConstants,
    d: usize,
    eps: f64,
    delta_conf: f64,
    c: f64,
    scale: f64,
) -> Result<PerturbedGdParams, OptimizerError> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta_conf)?;
    check_scale(scale)?;
    if !(c > 0.0 && c <= 1.0) {
        return Err(OptimizerError::InvalidArgument(format!("c must lie in (0, 1], got {c}")));
    }
    if d == 0 {
        return Err(OptimizerError::InvalidArgument("dimension must be positive".into()));
    }
    let l1 = consts.l1;
    let l2 = consts.l2()?;
    let f0 = consts.f0;
    let et = eps / l2;
    let arg = 2.0 * d as f64 * l1 * l1 * f0 / (c * c * et.powf(2.5) * delta_conf);
    // ln(0) = -inf when F0 = 0, so the clamp takes over.
    let chi = 4.0 * arg.ln().max(5.0);
    let cs = c * scale;
    let t_real = chi / (cs * cs) * l1 / (l2 * et).sqrt();
    if !(t_real.is_finite() && t_real < u64::MAX as f64 / 2.0) {
        return Err(OptimizerError::Infeasible(format!("t_thres = {t_real:e} overflows")));
    }
    Ok(PerturbedGdParams {
        c,
        eps,
        delta_conf,
        d,
        eps_tilde: et,
        chi,
        eta: cs / l1,
        r: c.sqrt() * et / (chi * chi * l1),
        g_thres: c.sqrt() * et / (chi * chi),
        f_thres: c / chi.powi(3) * (et.powi(3) / l2).sqrt(),
        t_thres: (t_real.ceil() as u64).max(1),
        l1,
        l2,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `‖∇F(u₀)‖ > g_thres`: one plain gradient step.
    LargeGradient,
    /// Perturb, then `t_thres` gradient steps.
    Perturb { escaped: bool },
}

/// The branch test at `u₀` costs one gradient call, so the perturbation
/// branch uses `t_thres + 1` calls.
#[derive(Debug, Clone)]
pub struct PerturbedGdProcedure {
    obj: Objective,
    params: PerturbedGdParams,
    last_branch: Option<Branch>,
}

pub fn perturbed_gd_procedure(obj: Objective, params: PerturbedGdParams) -> PerturbedGdProcedure {
    PerturbedGdProcedure {
        obj,
        params,
        last_branch: None,
    }
}

impl PerturbedGdProcedure {
    pub fn params(&self) -> &PerturbedGdParams {
        &self.params
    }

    pub fn last_branch(&self) -> Option<Branch> {
        self.last_branch
    }

    fn small_gradient(&self, u0: &Vector) -> bool {
        self.obj.gradient(u0).norm() <= self.params.g_thres
    }
}

impl DecreaseProcedure for PerturbedGdProcedure {
    fn objective(&self) -> &Objective {
        &self.obj
    }

    fn advance(&mut self, u0: &Vector, rng: &mut RngState) -> Advance {
        let p = self.params;
        let g0 = self.obj.gradient(u0);
        if g0.norm() > p.g_thres {
            self.last_branch = Some(Branch::LargeGradient);
            return Advance {
                next: u0 - g0 * p.eta,
                intermediates: vec![u0.clone()],
                oracle_calls: 1,
                value_evals: 0,
            };
        }
        let mut w = u0 + sample_uniform_ball(rng, u0.len(), p.r);
        for _ in 0..p.t_thres {
            let g = self.obj.gradient(&w);
            w -= g * p.eta;
        }
        let escaped = self.obj.value(&w) - self.obj.value(u0) <= -p.f_thres;
        self.last_branch = Some(Branch::Perturb { escaped });
        Advance {
            next: w,
            intermediates: vec![u0.clone()],
            oracle_calls: p.t_thres + 1,
            value_evals: 2,
        }
    }

    fn delta(&self, u0: &Vector) -> f64 {
        let p = &self.params;
        if self.small_gradient(u0) {
            p.f_thres
        } else {
            0.5 * p.eta * p.g_thres * p.g_thres
        }
    }

    fn t_oracle(&self, u0: &Vector) -> u64 {
        if self.small_gradient(u0) {
            self.params.t_thres + 1
        } else {
            1
        }
    }

    fn failure_prob(&self, _u0: &Vector) -> f64 {
        let p = &self.params;
        p.d as f64 * p.l1 / (p.l2 * p.eps_tilde).sqrt() * (-p.chi).exp()
    }
}
