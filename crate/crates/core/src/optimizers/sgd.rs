use crate::calculus::{EffectiveConstants, SelfBoundingProfile};
use crate::framework::{Advance, DecreaseProcedure};
use crate::numerics::{RngState, Vector};
use crate::oracles::GradientOracle;
use crate::problems::Objective;

use super::{check_scale, check_unit_interval, OptimizerError};

/// Block-SGD schedule. `eta` and `k0` are the values actually run; the
/// `*_theory` fields keep the unscaled ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdParams {
    pub eta: f64,
    pub k0: u64,
    pub eps: f64,
    pub delta_conf: f64,
    /// Per-block failure probability `p = δηK₀ε²/(4(F₀+1))`.
    pub p_block: f64,
    pub eta_tilde: f64,
    pub eta_theory: f64,
    pub k0_theory: u64,
    pub l0: f64,
    pub l1: f64,
    pub sigma1: f64,
    pub b: f64,
    pub c: f64,
    pub l_tilde_prime: f64,
    pub l_tilde: f64,
    pub scale: f64,
}

impl SgdParams {
    /// A hand-set schedule with no theory attached.
    pub fn manual(eta: f64, k0: u64, eps: f64) -> Self {
        SgdParams {
            eta,
            k0,
            eps,
            delta_conf: f64::NAN,
            p_block: 0.0,
            eta_tilde: eta,
            eta_theory: eta,
            k0_theory: k0,
            l0: f64::NAN,
            l1: f64::NAN,
            sigma1: f64::NAN,
            b: f64::NAN,
            c: f64::NAN,
            l_tilde_prime: f64::NAN,
            l_tilde: f64::NAN,
            scale: 1.0,
        }
    }

    /// Promised block decrease `ηK₀ε²/4`.
    pub fn delta(&self) -> f64 {
        self.eta * self.k0 as f64 * self.eps * self.eps / 4.0
    }
}

/// Large root of `L = (3√2·ln L)⁸`.
fn log_fixed_point() -> f64 {
    let a = 3.0 * std::f64::consts::SQRT_2;
    let mut l: f64 = 1e30;
    for _ in 0..200 {
        let next = (a * l.ln()).powi(8);
        if ((next - l) / l).abs() < 1e-15 {
            return next;
        }
        l = next;
    }
    l
}

pub fn build_sgd(
    profile: &SelfBoundingProfile,
    consts: &EffectiveConstants,
    eps: f64,
    delta_conf: f64,
    scale: f64,
) -> Result<SgdParams, OptimizerError> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta_conf)?;
    check_scale(scale)?;
    let f0 = consts.f0;
    let l0 = consts.rho0_at_f0_plus1;
    let l1 = profile.rho1(f0 + 1.0);
    let sigma1 = profile.sigma(f0 + 1.0)?;

    let b = sigma1 * sigma1 + sigma1 * l0 / 8.0;
    let c = (128.0 * b).max(64.0 * (f0 + 1.0).powi(2));
    let l_tilde_prime = (8.0 * l1 * (l0 * l0 + sigma1 * sigma1))
        .max(2.0 * l0)
        .max(4.0 * sigma1);
    let l_tilde = (l_tilde_prime * l_tilde_prime * c * c)
        .max(log_fixed_point())
        .max((3.0 * std::f64::consts::SQRT_2).powi(8));

    let le = (1.0 / eps).ln();
    let ld = (1.0 / delta_conf).ln();
    let eta_tilde = eps * eps / (l_tilde * le.powi(6) * ld.powi(6));
    let k0_real = c / (eps * eps) * (1.0 / eta_tilde).ln().powi(2) * ld * ld * le * le;
    if !k0_real.is_finite() || k0_real > u64::MAX as f64 / 2.0 {
        return Err(OptimizerError::Infeasible(format!("K0 = {k0_real:e} overflows")));
    }
    let k0 = k0_real.ceil() as u64;
    let eta = eta_tilde / l0.max(1.0);
    let kf = k0 as f64;
    let p_block = delta_conf * eta * kf * eps * eps / (4.0 * (f0 + 1.0));

    let eta_cap = (eps * eps / (8.0 * l1 * (l0 * l0 + sigma1 * sigma1)))
        .min(1.0 / (2.0 * kf * l0))
        .min(1.0 / (4.0 * sigma1 * (kf * (4.0 * kf / p_block).ln()).sqrt()));
    if !(eta_tilde <= eta_cap) {
        return Err(OptimizerError::Infeasible(format!(
            "eta_tilde = {eta_tilde:e} exceeds {eta_cap:e}"
        )));
    }
    let k_need = 128.0 * b * (2.0 * kf.ln() / p_block).ln();
    if !(kf * eps * eps >= k_need) {
        return Err(OptimizerError::Infeasible(format!(
            "K0 eps^2 = {:e} below {k_need:e}",
            kf * eps * eps
        )));
    }
    if k0 < 4 {
        return Err(OptimizerError::Infeasible(format!("K0 = {k0} < 4")));
    }

    Ok(SgdParams {
        eta: eta * scale,
        k0: ((kf / scale).ceil() as u64).max(1),
        eps,
        delta_conf,
        p_block,
        eta_tilde,
        eta_theory: eta,
        k0_theory: k0,
        l0,
        l1,
        sigma1,
        b,
        c,
        l_tilde_prime,
        l_tilde,
        scale,
    })
}

/// `K₀` consecutive stochastic steps per invocation.
#[derive(Debug, Clone)]
pub struct SgdProcedure {
    oracle: GradientOracle,
    params: SgdParams,
}

pub fn sgd_procedure(oracle: GradientOracle, params: SgdParams) -> SgdProcedure {
    SgdProcedure { oracle, params }
}

impl SgdProcedure {
    pub fn params(&self) -> &SgdParams {
        &self.params
    }

    pub fn oracle(&self) -> &GradientOracle {
        &self.oracle
    }
}

impl DecreaseProcedure for SgdProcedure {
    fn objective(&self) -> &Objective {
        self.oracle.objective()
    }

    fn advance(&mut self, u0: &Vector, rng: &mut RngState) -> Advance {
        let k0 = self.params.k0 as usize;
        let mut iterates = Vec::with_capacity(k0 + 1);
        let mut p = u0.clone();
        for _ in 0..k0 {
            let g = self.oracle.query(&p, rng);
            let next = &p - g * self.params.eta;
            iterates.push(p);
            p = next;
        }
        iterates.push(p.clone());
        Advance {
            next: p,
            intermediates: iterates,
            oracle_calls: self.params.k0,
            value_evals: 0,
        }
    }

    fn delta(&self, _u0: &Vector) -> f64 {
        self.params.delta()
    }

    fn t_oracle(&self, _u0: &Vector) -> u64 {
        self.params.k0
    }

    fn failure_prob(&self, _u0: &Vector) -> f64 {
        self.params.p_block
    }
}
