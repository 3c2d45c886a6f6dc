//! Decrease procedures and the generic driver.
//!
//! A decrease procedure maps `u₀` to a next point `A₁(u₀)` and a list of
//! intermediate points `A₂(u₀)` using at most `t_oracle(u₀)` oracle calls.
//! With high probability either `F(A₁(u₀)) < F(u₀) − Δ(u₀)` or one of the
//! candidates `R(A₂(u₀))` lies in the target set. Chaining the procedure from
//! `w₀` therefore reaches the target within `F(w₀)/Δ̄ + sup t_oracle` calls,
//! where `Δ̄ = inf Δ/t_oracle`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{RngState, Vector};
use crate::problems::Objective;
use crate::stationarity::{check_thresholds, StationarityError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameworkError {
    #[error("F is not finite at step {step}")]
    NonFiniteValue { step: usize },
    #[error("oracle budget {budget} is below t_oracle(w0) = {t_oracle}")]
    BudgetTooSmall { budget: u64, t_oracle: u64 },
    #[error("step {step} used {calls} oracle calls but t_oracle(u0) = {t_oracle}")]
    AccountingViolation { step: usize, calls: u64, t_oracle: u64 },
    #[error("step {step} produced no intermediates or used no oracle calls")]
    NoProgress { step: usize },
    #[error("delta_bar must be positive, got {0}")]
    InvalidDeltaBar(f64),
    #[error("w0 has dimension {got}, objective expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Stationarity(#[from] StationarityError),
}

/// Output of one procedure invocation.
#[derive(Debug, Clone)]
pub struct Advance {
    pub next: Vector,
    pub intermediates: Vec<Vector>,
    pub oracle_calls: u64,
    /// Function evaluations made by the algorithm itself, counted apart from
    /// gradient calls.
    pub value_evals: u64,
}

pub trait DecreaseProcedure {
    fn objective(&self) -> &Objective;

    fn advance(&mut self, u0: &Vector, rng: &mut RngState) -> Advance;

    fn output_rule(&self, intermediates: &[Vector]) -> Vec<Vector> {
        intermediates.to_vec()
    }

    /// Promised decrease `Δ(u₀)`.
    fn delta(&self, u0: &Vector) -> f64;

    fn t_oracle(&self, u0: &Vector) -> u64;

    fn failure_prob(&self, _u0: &Vector) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Fosp,
    Sosp,
    Custom,
}

/// Outcome of testing one point against a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub hit: bool,
    pub grad_norm: Option<f64>,
    pub lambda_min: Option<f64>,
}

type Checker = Arc<dyn Fn(&Vector) -> Result<Certificate, FrameworkError> + Send + Sync>;

/// Target set `S` together with its membership test.
#[derive(Clone)]
pub struct StationaryTarget {
    kind: TargetKind,
    epsilon: f64,
    checker: Checker,
}

impl fmt::Debug for StationaryTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StationaryTarget")
            .field("kind", &self.kind)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

impl StationaryTarget {
    pub fn fosp(obj: &Objective, eps: f64) -> Self {
        let obj = obj.clone();
        StationaryTarget {
            kind: TargetKind::Fosp,
            epsilon: eps,
            checker: Arc::new(move |w| {
                let r = check_thresholds(&obj, w, eps, None)?;
                Ok(Certificate {
                    hit: r.is_fosp,
                    grad_norm: Some(r.grad_norm),
                    lambda_min: None,
                })
            }),
        }
    }

    /// `‖∇F‖ ≤ ε` and `λ_min ≥ −√ε`; refused for objectives without a Hessian.
    pub fn sosp(obj: &Objective, eps: f64) -> Result<Self, FrameworkError> {
        let mut t = Self::thresholds(obj, eps, eps.sqrt())?;
        t.kind = TargetKind::Sosp;
        t.epsilon = eps;
        Ok(t)
    }

    /// `‖∇F‖ ≤ grad_tol` and `λ_min ≥ −curvature_tol`. The Hessian is only
    /// examined once the gradient test passes, so `lambda_min` is `None` on
    /// points that fail it.
    pub fn thresholds(
        obj: &Objective,
        grad_tol: f64,
        curvature_tol: f64,
    ) -> Result<Self, FrameworkError> {
        if !obj.has_hessian() {
            return Err(StationarityError::MissingHessian(obj.name().to_string()).into());
        }
        let obj = obj.clone();
        Ok(StationaryTarget {
            kind: TargetKind::Custom,
            epsilon: grad_tol,
            checker: Arc::new(move |w| {
                let g = check_thresholds(&obj, w, grad_tol, None)?;
                if !g.is_fosp {
                    return Ok(Certificate {
                        hit: false,
                        grad_norm: Some(g.grad_norm),
                        lambda_min: None,
                    });
                }
                let r = check_thresholds(&obj, w, grad_tol, Some(curvature_tol))?;
                Ok(Certificate {
                    hit: r.is_sosp == Some(true),
                    grad_norm: Some(r.grad_norm),
                    lambda_min: r.lambda_min,
                })
            }),
        })
    }

    pub fn custom(
        eps: f64,
        f: impl Fn(&Vector) -> Certificate + Send + Sync + 'static,
    ) -> Self {
        StationaryTarget {
            kind: TargetKind::Custom,
            epsilon: eps,
            checker: Arc::new(move |w| Ok(f(w))),
        }
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn check(&self, w: &Vector) -> Result<Certificate, FrameworkError> {
        (self.checker)(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Hit,
    Budget,
    DecreaseViolation,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Hit => "hit",
            Termination::Budget => "budget",
            Termination::DecreaseViolation => "decrease_violation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub step: usize,
    pub point: Vector,
    pub value: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone)]
pub struct StepTrace {
    pub step: usize,
    pub oracle_calls: u64,
    pub oracle_calls_cum: u64,
    pub value_evals: u64,
    pub f_before: f64,
    pub f_after: f64,
    pub delta: f64,
    pub t_oracle: u64,
    pub decreased: bool,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub candidates: Vec<CandidateRecord>,
    pub first_hit: Option<usize>,
    pub total_oracle_calls: u64,
    pub total_value_evals: u64,
    /// `F` at every outer iterate, starting with `F(w₀)`.
    pub function_values: Vec<f64>,
    pub steps: Vec<StepTrace>,
    pub decrease_violations: usize,
    /// Smallest `Δ(u)/t_oracle(u)` over visited iterates.
    pub empirical_delta_bar: f64,
    pub terminated: Termination,
    pub final_point: Vector,
}

impl RunRecord {
    pub fn hit(&self) -> Option<&CandidateRecord> {
        self.first_hit.map(|i| &self.candidates[i])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DriverOptions {
    pub oracle_budget: u64,
    /// Stop at the first step that neither hits nor achieves the promised
    /// decrease. Off by default: the decrease is only a high-probability event.
    pub stop_on_violation: bool,
}

impl DriverOptions {
    pub fn with_budget(oracle_budget: u64) -> Self {
        DriverOptions {
            oracle_budget,
            stop_on_violation: false,
        }
    }
}

pub fn run_driver<P: DecreaseProcedure + ?Sized>(
    proc: &mut P,
    w0: &Vector,
    target: &StationaryTarget,
    oracle_budget: u64,
    rng: &mut RngState,
) -> Result<RunRecord, FrameworkError> {
    run_driver_with(proc, w0, target, &DriverOptions::with_budget(oracle_budget), rng)
}

pub fn run_driver_with<P: DecreaseProcedure + ?Sized>(
    proc: &mut P,
    w0: &Vector,
    target: &StationaryTarget,
    opts: &DriverOptions,
    rng: &mut RngState,
) -> Result<RunRecord, FrameworkError> {
    let obj = proc.objective().clone();
    if w0.len() != obj.dim() {
        return Err(FrameworkError::DimensionMismatch {
            expected: obj.dim(),
            got: w0.len(),
        });
    }
    let f0 = obj.value(w0);
    if !f0.is_finite() {
        return Err(FrameworkError::NonFiniteValue { step: 0 });
    }
    let t0 = proc.t_oracle(w0);
    if opts.oracle_budget < t0 {
        return Err(FrameworkError::BudgetTooSmall {
            budget: opts.oracle_budget,
            t_oracle: t0,
        });
    }

    let mut u = w0.clone();
    let mut fu = f0;
    let mut rec = RunRecord {
        candidates: Vec::new(),
        first_hit: None,
        total_oracle_calls: 0,
        total_value_evals: 0,
        function_values: vec![f0],
        steps: Vec::new(),
        decrease_violations: 0,
        empirical_delta_bar: f64::INFINITY,
        terminated: Termination::Budget,
        final_point: w0.clone(),
    };

    for step in 0.. {
        if rec.total_oracle_calls >= opts.oracle_budget {
            rec.terminated = Termination::Budget;
            break;
        }
        let delta = proc.delta(&u);
        let t_oracle = proc.t_oracle(&u);
        rec.empirical_delta_bar = rec.empirical_delta_bar.min(delta / t_oracle as f64);
        let adv = proc.advance(&u, rng);
        if adv.intermediates.is_empty() || adv.oracle_calls == 0 {
            return Err(FrameworkError::NoProgress { step });
        }
        if adv.oracle_calls > t_oracle {
            return Err(FrameworkError::AccountingViolation {
                step,
                calls: adv.oracle_calls,
                t_oracle,
            });
        }
        rec.total_oracle_calls += adv.oracle_calls;
        rec.total_value_evals += adv.value_evals;

        let mut hit = false;
        for point in proc.output_rule(&adv.intermediates) {
            let certificate = target.check(&point)?;
            let value = obj.value(&point);
            rec.candidates.push(CandidateRecord {
                step,
                point,
                value,
                certificate,
            });
            if certificate.hit {
                rec.first_hit = Some(rec.candidates.len() - 1);
                hit = true;
                break;
            }
        }

        let f_next = obj.value(&adv.next);
        if !f_next.is_finite() {
            return Err(FrameworkError::NonFiniteValue { step: step + 1 });
        }
        let decreased = f_next < fu - delta;
        rec.steps.push(StepTrace {
            step,
            oracle_calls: adv.oracle_calls,
            oracle_calls_cum: rec.total_oracle_calls,
            value_evals: adv.value_evals,
            f_before: fu,
            f_after: f_next,
            delta,
            t_oracle,
            decreased,
        });
        if hit {
            rec.terminated = Termination::Hit;
            rec.final_point = u.clone();
            break;
        }
        if !decreased {
            rec.decrease_violations += 1;
            if opts.stop_on_violation {
                rec.terminated = Termination::DecreaseViolation;
                rec.final_point = adv.next;
                rec.function_values.push(f_next);
                break;
            }
        }
        u = adv.next;
        fu = f_next;
        rec.function_values.push(fu);
        rec.final_point = u.clone();
    }
    Ok(rec)
}

/// `F₀/Δ̄ + sup t_oracle`.
pub fn theoretical_call_bound(
    f0: f64,
    delta_bar: f64,
    sup_t_oracle: u64,
) -> Result<f64, FrameworkError> {
    if !(delta_bar > 0.0) {
        return Err(FrameworkError::InvalidDeltaBar(delta_bar));
    }
    Ok(f0 / delta_bar + sup_t_oracle as f64)
}
