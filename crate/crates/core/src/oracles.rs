//! Gradient oracles.
//!
//! Noise is additive and its law does not depend on the iterate, so the
//! Hessian of every noisy sample equals the true Hessian and the oracle
//! Hessian bound reduces to `ρ₁` of the function value.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::calculus::ScalarFn;
use crate::numerics::{sample_uniform_ball, RngState, Vector};
use crate::problems::Objective;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("the {0} oracle has no Hessian bound")]
    Unsupported(&'static str),
}

#[derive(Clone)]
pub enum NoiseKind {
    Exact,
    /// Uniform in the ball of radius `sigma(F(w))`.
    Ball { sigma: ScalarFn },
    /// Ball noise plus `σ̃·Λ` with `Λ` uniform in the unit ball.
    Injected { sigma: ScalarFn, sigma_tilde: f64 },
    /// `N(0, std²·I)`; unbounded, so outside the bounded-noise theory.
    Gaussian { std: f64 },
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Exact => "exact",
            NoiseKind::Ball { .. } => "ball",
            NoiseKind::Injected { .. } => "injected",
            NoiseKind::Gaussian { .. } => "gaussian",
        }
    }
}

impl fmt::Debug for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::Gaussian { std } => write!(f, "Gaussian {{ std: {std} }}"),
            NoiseKind::Injected { sigma_tilde, .. } => {
                write!(f, "Injected {{ sigma_tilde: {sigma_tilde} }}")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// A gradient oracle with its own call counter.
#[derive(Clone, Debug)]
pub struct GradientOracle {
    objective: Objective,
    kind: NoiseKind,
    calls: u64,
}

impl GradientOracle {
    pub fn new(objective: Objective, kind: NoiseKind) -> Self {
        GradientOracle {
            objective,
            kind,
            calls: 0,
        }
    }

    pub fn exact(objective: Objective) -> Self {
        Self::new(objective, NoiseKind::Exact)
    }

    pub fn ball_noise(
        objective: Objective,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            objective,
            NoiseKind::Ball {
                sigma: Arc::new(sigma),
            },
        )
    }

    pub fn injected(
        objective: Objective,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_tilde: f64,
    ) -> Self {
        Self::new(
            objective,
            NoiseKind::Injected {
                sigma: Arc::new(sigma),
                sigma_tilde,
            },
        )
    }

    pub fn gaussian(objective: Objective, std: f64) -> Self {
        Self::new(objective, NoiseKind::Gaussian { std })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    pub fn call_count(&self) -> u64 {
        self.calls
    }

    pub fn reset_count(&mut self) {
        self.calls = 0;
    }

    pub fn sigma_tilde(&self) -> f64 {
        match &self.kind {
            NoiseKind::Injected { sigma_tilde, .. } => *sigma_tilde,
            _ => 0.0,
        }
    }

    /// Deterministic bound on `‖g − ∇F(w)‖` given `F(w)`; `None` for Gaussian noise.
    pub fn noise_bound(&self, fval: f64) -> Option<f64> {
        match &self.kind {
            NoiseKind::Exact => Some(0.0),
            NoiseKind::Ball { sigma } => Some(sigma(fval)),
            NoiseKind::Injected { sigma, sigma_tilde } => Some(sigma(fval) + sigma_tilde),
            NoiseKind::Gaussian { .. } => None,
        }
    }

    pub fn query(&mut self, w: &Vector, rng: &mut RngState) -> Vector {
        self.calls += 1;
        let mut g = self.objective.gradient(w);
        let d = g.len();
        match &self.kind {
            NoiseKind::Exact => {}
            NoiseKind::Ball { sigma } => {
                let r = sigma(self.objective.value(w));
                g += sample_uniform_ball(rng, d, r);
            }
            NoiseKind::Injected { sigma, sigma_tilde } => {
                let r = sigma(self.objective.value(w));
                g += sample_uniform_ball(rng, d, r);
                g += sample_uniform_ball(rng, d, 1.0) * *sigma_tilde;
            }
            NoiseKind::Gaussian { std } => {
                g += rng.gaussian_vector(d, *std);
            }
        }
        g
    }

    /// `ρ₃(‖g‖, F) = ρ₁(F)` for the additive-noise kinds.
    pub fn oracle_hessian_bound(&self, _grad_norm: f64, fval: f64) -> Result<f64, OracleError> {
        match &self.kind {
            NoiseKind::Gaussian { .. } => Err(OracleError::Unsupported("gaussian")),
            _ => Ok(self.objective.profile().rho1(fval)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{phase_retrieval, quadratic, PhaseRetrievalSpec};

    fn pr() -> Objective {
        let mut rng = RngState::new(0, 0);
        phase_retrieval(PhaseRetrievalSpec::random(4, &mut rng).unwrap())
    }

    #[test]
    fn zero_noise_is_exact() {
        let f = pr();
        let mut o = GradientOracle::ball_noise(f.clone(), |_| 0.0);
        let mut rng = RngState::new(1, 0);
        let w = Vector::from_vec(vec![0.3, -0.2, 0.1, 0.5]);
        assert_eq!(o.query(&w, &mut rng), f.gradient(&w));
        assert_eq!(o.call_count(), 1);
    }

    #[test]
    fn ball_noise_is_unbiased_and_bounded() {
        let f = quadratic(vec![1.0, 2.0, 3.0]).unwrap();
        let sigma = 0.5;
        let mut o = GradientOracle::ball_noise(f.clone(), move |_| sigma);
        let mut rng = RngState::new(2, 0);
        let w = Vector::from_vec(vec![1.0, -1.0, 0.5]);
        let g0 = f.gradient(&w);
        let n = 100_000;
        let mut sum = Vector::zeros(3);
        for _ in 0..n {
            let e = o.query(&w, &mut rng) - &g0;
            assert!(e.norm() <= sigma);
            sum += e;
        }
        assert_eq!(o.call_count(), n);
        let mean = sum / n as f64;
        assert!(mean.norm() <= 3.0 * sigma / (n as f64).sqrt());
        // Per-coordinate std of the uniform ball in 3D is sigma/sqrt(5).
        let se = sigma / 5f64.sqrt() / (n as f64).sqrt();
        for k in 0..3 {
            assert!(mean[k].abs() <= 4.0 * se);
        }
    }

    #[test]
    fn injected_noise_hard_bound() {
        let f = pr();
        let mut o = GradientOracle::injected(f.clone(), |x| 0.1 * (1.0 + x), 0.3);
        let mut rng = RngState::new(3, 0);
        for _ in 0..5000 {
            let w = rng.gaussian_vector(4, 0.5);
            let e = (o.query(&w, &mut rng) - f.gradient(&w)).norm();
            assert!(e <= o.noise_bound(f.value(&w)).unwrap());
        }
        assert_eq!(o.sigma_tilde(), 0.3);
    }

    #[test]
    fn equal_states_give_equal_gradients() {
        let f = pr();
        let mut a = GradientOracle::injected(f.clone(), |_| 0.2, 0.4);
        let mut b = a.clone();
        let w = Vector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        let mut ra = RngState::new(5, 6);
        let mut rb = RngState::new(5, 6);
        for _ in 0..10 {
            assert_eq!(a.query(&w, &mut ra), b.query(&w, &mut rb));
        }
    }

    #[test]
    fn hessian_bound_is_rho1() {
        let f = pr();
        let exact = GradientOracle::exact(f.clone());
        let ball = GradientOracle::ball_noise(f.clone(), |_| 1.0);
        assert_eq!(exact.oracle_hessian_bound(0.0, 1.0).unwrap(), 19.0);
        assert_eq!(ball.oracle_hessian_bound(5.0, 1.0).unwrap(), 19.0);
        assert!(ball.oracle_hessian_bound(0.0, 2.0).unwrap() >= ball.oracle_hessian_bound(0.0, 1.0).unwrap());
        let g = GradientOracle::gaussian(f, 0.1);
        assert_eq!(
            g.oracle_hessian_bound(0.0, 1.0),
            Err(OracleError::Unsupported("gaussian"))
        );
        assert_eq!(g.noise_bound(1.0), None);
    }
}
