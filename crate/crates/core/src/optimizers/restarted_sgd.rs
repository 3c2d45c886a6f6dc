use crate::calculus::RestartedNoiseConstants;
use crate::framework::{Advance, DecreaseProcedure};
use crate::numerics::{RngState, Vector};
use crate::oracles::{GradientOracle, NoiseKind};
use crate::problems::Objective;

use super::{check_scale, check_unit_interval, OptimizerError};

const MAX_FIXED_POINT_ITERS: usize = 50;
const FIXED_POINT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartedSgdParams {
    pub p_conf: f64,
    /// Requested accuracy; `eps_used` is it after clamping to `1/L₂`.
    pub eps: f64,
    pub eps_used: f64,
    pub d: usize,
    /// `⌊ln(3/p)/ln(1.25) + 1⌋`.
    pub n_rounds: u64,
    pub c_tilde1: f64,
    pub delta: f64,
    pub delta2: f64,
    pub b: f64,
    pub eta_tilde: f64,
    /// Unscaled step and block length. `k0_theory` is kept as a real since it
    /// routinely exceeds the `u64` range.
    pub eta_theory: f64,
    pub k0_theory: f64,
    pub k_o: f64,
    /// Step and block length actually run. `k0` saturates at `u64::MAX`.
    pub eta: f64,
    pub k0: u64,
    pub sigma_tilde: f64,
    pub sigma1: f64,
    pub l1: f64,
    pub l2: f64,
    pub scale: f64,
    pub fixed_point_iters: usize,
}

impl RestartedSgdParams {
    /// Right-hand side of the step-size condition at the unscaled values.
    pub fn eta_bound(&self) -> f64 {
        let s = self.sigma1.max(1.0);
        let k = self.k0_theory;
        self.b * self.b * self.delta
            / (512.0 * s * s * self.c_tilde1 * (48.0 * k / self.p_conf).ln())
            / (3.0 * (1.0 + k.ln()))
    }

    /// Promised decrease `B²/(7ηK₀)`, at the run values.
    pub fn block_decrease(&self) -> f64 {
        self.b * self.b / (7.0 * self.eta * self.k0 as f64)
    }

    /// Gradient bound `18·L₂·B²` for the averaged output of a block without escape.
    pub fn average_gradient_bound(&self) -> f64 {
        18.0 * self.l2 * self.b * self.b
    }
}

struct Schedule {
    c_tilde1: f64,
    b: f64,
    eta_tilde: f64,
    eta: f64,
}

pub fn build_restarted_sgd(
    nc: &RestartedNoiseConstants,
    d: usize,
    eps: f64,
    p_conf: f64,
    scale: f64,
) -> Result<RestartedSgdParams, OptimizerError> {
    check_unit_interval("p", p_conf)?;
    check_scale(scale)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(OptimizerError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if d == 0 {
        return Err(OptimizerError::InvalidArgument("dimension must be positive".into()));
    }
    let (l1, l2, s1) = (nc.l1_rsgd, nc.l2_rsgd, nc.sigma1);
    let eps_used = eps.min(1.0 / l2);
    let n = ((3.0 / p_conf).ln() / 1.25f64.ln() + 1.0).floor();
    let delta = (l2 * eps_used).sqrt();
    let delta2 = 16.0 * delta;
    let sm = s1.max(1.0);
    let b_cap = 1f64.min(s1 / l1).min(1.0 / l1).min(1.0 / l2);
    let root_d = (d as f64).sqrt();

    let step = |eta: f64| {
        let c_tilde1 = 2.0 * n * (24.0 * root_d / eta).ln();
        let b = (delta / (l2 * c_tilde1)).min(b_cap);
        let eta_tilde = b * b * delta
            / (4096.0 * sm * sm * (48.0 / p_conf).ln() * (1.0 / p_conf).ln() * n);
        let eta_next = (eta_tilde / (1.0 / eta_tilde).ln().powi(3))
            .min(1.0)
            .min(1.0 / (s1 * s1));
        Schedule {
            c_tilde1,
            b,
            eta_tilde,
            eta: eta_next,
        }
    };

    let mut eta = 1e-6;
    let mut iters = 0;
    let mut converged = false;
    while iters < MAX_FIXED_POINT_ITERS {
        iters += 1;
        let next = step(eta).eta;
        if !(next.is_finite() && next > 0.0) {
            return Err(OptimizerError::Infeasible(format!("step size became {next}")));
        }
        let done = ((next - eta) / eta).abs() < FIXED_POINT_RTOL;
        eta = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OptimizerError::NonConvergence(MAX_FIXED_POINT_ITERS));
    }
    let Schedule {
        c_tilde1,
        b,
        eta_tilde,
        ..
    } = step(eta);
    let k0_theory = (c_tilde1 / (eta * delta2)).ceil();
    let k_o = 2.0 * (24.0 * root_d / eta).ln() / (eta * delta2);

    let params = RestartedSgdParams {
        p_conf,
        eps,
        eps_used,
        d,
        n_rounds: n as u64,
        c_tilde1,
        delta,
        delta2,
        b,
        eta_tilde,
        eta_theory: eta,
        k0_theory,
        k_o,
        eta: eta * scale,
        k0: ((k0_theory / scale).ceil() as u64).max(1),
        sigma_tilde: nc.sigma_tilde,
        sigma1: s1,
        l1,
        l2,
        scale,
        fixed_point_iters: iters,
    };
    let bound = params.eta_bound();
    if !(eta <= bound) || k0_theory < 1.0 {
        return Err(OptimizerError::Infeasible(format!(
            "eta = {eta:e} exceeds {bound:e}"
        )));
    }
    Ok(params)
}

/// Noisy steps from `u₀` until the iterate leaves `B(u₀, B)` or `K₀` steps
/// pass. The candidate is the average of the iterates before the last step.
#[derive(Debug, Clone)]
pub struct RestartedSgdProcedure {
    oracle: GradientOracle,
    params: RestartedSgdParams,
    last_escape: Option<u64>,
}

/// Requires an injected-noise oracle whose `σ̃` matches the parameters.
pub fn restarted_sgd_procedure(
    oracle: GradientOracle,
    params: RestartedSgdParams,
) -> Result<RestartedSgdProcedure, OptimizerError> {
    match oracle.kind() {
        NoiseKind::Injected { sigma_tilde, .. } => {
            let scale = sigma_tilde.abs().max(params.sigma_tilde.abs()).max(1e-300);
            if (sigma_tilde - params.sigma_tilde).abs() > 1e-12 * scale {
                return Err(OptimizerError::InvalidArgument(format!(
                    "oracle sigma_tilde {sigma_tilde} differs from {}",
                    params.sigma_tilde
                )));
            }
        }
        other => return Err(OptimizerError::WrongOracle(other.name())),
    }
    Ok(RestartedSgdProcedure {
        oracle,
        params,
        last_escape: None,
    })
}

impl RestartedSgdProcedure {
    pub fn params(&self) -> &RestartedSgdParams {
        &self.params
    }

    pub fn oracle(&self) -> &GradientOracle {
        &self.oracle
    }

    /// Step index of the escape in the last block, if it escaped.
    pub fn last_escape(&self) -> Option<u64> {
        self.last_escape
    }
}

impl DecreaseProcedure for RestartedSgdProcedure {
    fn objective(&self) -> &Objective {
        self.oracle.objective()
    }

    fn advance(&mut self, u0: &Vector, rng: &mut RngState) -> Advance {
        let RestartedSgdParams { eta, k0, b, .. } = self.params;
        let mut iterates = Vec::new();
        let mut x = u0.clone();
        self.last_escape = None;
        for k in 1..=k0 {
            let g = self.oracle.query(&x, rng);
            let next = &x - g * eta;
            iterates.push(x);
            x = next;
            if (&x - u0).norm() > b {
                self.last_escape = Some(k);
                return Advance {
                    next: x,
                    intermediates: iterates,
                    oracle_calls: k,
                    value_evals: 0,
                };
            }
        }
        Advance {
            next: x,
            intermediates: iterates,
            oracle_calls: k0,
            value_evals: 0,
        }
    }

    fn output_rule(&self, intermediates: &[Vector]) -> Vec<Vector> {
        let Some(first) = intermediates.first() else {
            return Vec::new();
        };
        let mut sum = Vector::zeros(first.len());
        for x in intermediates {
            sum += x;
        }
        vec![sum / intermediates.len() as f64]
    }

    fn delta(&self, _u0: &Vector) -> f64 {
        self.params.block_decrease()
    }

    fn t_oracle(&self, _u0: &Vector) -> u64 {
        self.params.k0
    }

    fn failure_prob(&self, _u0: &Vector) -> f64 {
        1.75 * self.params.p_conf
    }
}
