//! Self-bounding profiles and the constants derived from them.
//!
//! A profile bundles `ρ₁` (Hessian norm versus function value) with the
//! optional third-order bound `ρ₂`, oracle-Hessian bound `ρ₃` and noise bound
//! `σ`. From `ρ₁` alone follow `θ(x) = ∫₀ˣ dv/ρ₁(v)` and the gradient envelope
//! `ρ₀(x) = ρ₁(x)·√(2θ(x))`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{integrate_reciprocal, NumericsError, DEFAULT_QUAD_TOL};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("{function} decreases between x = {from} and x = {to}")]
    NonMonotone {
        function: &'static str,
        from: f64,
        to: f64,
    },
    #[error("{function} is NaN or negative at x = {at}")]
    InvalidValue { function: &'static str, at: f64 },
    #[error("rho1 must be positive at x = {at}")]
    NonPositiveRho1 { at: f64 },
    #[error("rho0 override {value} is below rho1*sqrt(2*theta) = {required} at x = {at}")]
    OverrideTooSmall { at: f64, value: f64, required: f64 },
    #[error("profile has no rho2")]
    MissingRho2,
    #[error("profile has no sigma")]
    MissingSigma,
    #[error("profile has no rho3")]
    MissingRho3,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Points at which user-supplied functions are spot-checked: 0 followed by 63
/// log-spaced points on `[1e-3, 1e3]`.
pub fn validation_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(64);
    g.push(0.0);
    for k in 0..63 {
        g.push(10f64.powf(-3.0 + 6.0 * k as f64 / 62.0));
    }
    g
}

#[derive(Clone)]
pub struct SelfBoundingProfile {
    rho1: ScalarFn,
    rho2: Option<ScalarFn>,
    rho3: Option<PairFn>,
    sigma: Option<ScalarFn>,
    rho0_override: Option<ScalarFn>,
}

impl fmt::Debug for SelfBoundingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfBoundingProfile")
            .field("rho1(1)", &(self.rho1)(1.0))
            .field("has_rho2", &self.rho2.is_some())
            .field("has_rho3", &self.rho3.is_some())
            .field("has_sigma", &self.sigma.is_some())
            .field("has_rho0_override", &self.rho0_override.is_some())
            .finish()
    }
}

pub struct ProfileBuilder {
    rho1: ScalarFn,
    rho2: Option<ScalarFn>,
    rho3: Option<PairFn>,
    sigma: Option<ScalarFn>,
    rho0_override: Option<ScalarFn>,
}

impl ProfileBuilder {
    pub fn rho2(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.rho2 = Some(Arc::new(f));
        self
    }

    pub fn rho3(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.rho3 = Some(Arc::new(f));
        self
    }

    pub fn sigma(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.sigma = Some(Arc::new(f));
        self
    }

    pub fn rho0_override(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.rho0_override = Some(Arc::new(f));
        self
    }

    /// Validates monotonicity and, when an override is given, that it
    /// dominates `ρ₁√(2θ)` on [`validation_grid`].
    pub fn build(self) -> Result<SelfBoundingProfile, CalculusError> {
        let grid = validation_grid();
        check_monotone("rho1", &*self.rho1, &grid)?;
        for &x in &grid[1..] {
            if (self.rho1)(x) <= 0.0 {
                return Err(CalculusError::NonPositiveRho1 { at: x });
            }
        }
        if let Some(f) = &self.rho2 {
            check_monotone("rho2", &**f, &grid)?;
        }
        if let Some(f) = &self.sigma {
            check_monotone("sigma", &**f, &grid)?;
        }
        if let Some(f) = &self.rho3 {
            for &x in grid.iter().step_by(8) {
                check_monotone("rho3", &|g| f(g, x), &grid)?;
            }
            for &g in grid.iter().step_by(8) {
                check_monotone("rho3", &|x| f(g, x), &grid)?;
            }
        }
        let rho0_at_origin_ok = (self.rho1)(0.0) > 0.0;
        match &self.rho0_override {
            None if !rho0_at_origin_ok => return Err(CalculusError::NonPositiveRho1 { at: 0.0 }),
            None => {}
            Some(ov) => {
                check_monotone("rho0_override", &**ov, &grid)?;
                if rho0_at_origin_ok {
                    check_domination(&*self.rho1, &**ov, &grid)?;
                }
            }
        }
        Ok(SelfBoundingProfile {
            rho1: self.rho1,
            rho2: self.rho2,
            rho3: self.rho3,
            sigma: self.sigma,
            rho0_override: self.rho0_override,
        })
    }
}

fn check_monotone(
    name: &'static str,
    f: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<(), CalculusError> {
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let y = f(x);
        if y.is_nan() || y < 0.0 {
            return Err(CalculusError::InvalidValue { function: name, at: x });
        }
        if let Some((px, py)) = prev {
            if y < py - 1e-12 * py.abs() {
                return Err(CalculusError::NonMonotone {
                    function: name,
                    from: px,
                    to: x,
                });
            }
        }
        prev = Some((x, y));
    }
    Ok(())
}

fn check_domination(
    rho1: &dyn Fn(f64) -> f64,
    ov: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<(), CalculusError> {
    let mut theta = 0.0;
    let mut prev = 0.0;
    for &x in grid {
        theta += integrate_reciprocal(rho1, prev, x, DEFAULT_QUAD_TOL)?;
        prev = x;
        let r1 = rho1(x);
        if !r1.is_finite() {
            continue;
        }
        let required = r1 * (2.0 * theta).sqrt();
        let value = ov(x);
        if value < required * (1.0 - 1e-9) - 1e-12 {
            return Err(CalculusError::OverrideTooSmall {
                at: x,
                value,
                required,
            });
        }
    }
    Ok(())
}

/// `L₁`, `L₁′`, `L₂` and the `ρ₀` values they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveConstants {
    pub f0: f64,
    pub l1: f64,
    pub l1_prime: f64,
    pub l2: Option<f64>,
    pub rho0_at_f0: f64,
    pub rho0_at_f0_plus1: f64,
}

impl EffectiveConstants {
    pub fn l2(&self) -> Result<f64, CalculusError> {
        self.l2.ok_or(CalculusError::MissingRho2)
    }
}

/// Noise and smoothness constants of the restarted method, which enlarge `L₁`
/// and `L₂` by the oracle terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartedNoiseConstants {
    pub sigma_prime: f64,
    pub sigma_tilde: f64,
    pub sigma1: f64,
    pub l1_rsgd: f64,
    pub l2_rsgd: f64,
}

impl SelfBoundingProfile {
    pub fn builder(rho1: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ProfileBuilder {
        ProfileBuilder {
            rho1: Arc::new(rho1),
            rho2: None,
            rho3: None,
            sigma: None,
            rho0_override: None,
        }
    }

    /// Classical `L`-smoothness: `ρ₁ ≡ L`, `ρ₀(x) = √(2Lx)`, `ρ₂ ≡ 0`.
    pub fn constant(l: f64) -> Result<Self, CalculusError> {
        if !(l.is_finite() && l > 0.0) {
            return Err(CalculusError::InvalidArgument(format!(
                "smoothness constant must be positive and finite, got {l}"
            )));
        }
        Self::builder(move |_| l)
            .rho2(|_| 0.0)
            .rho0_override(move |x| (2.0 * l * x).sqrt())
            .build()
    }

    /// Attaches the additive noise bound `σ`. Noise that does not depend on the
    /// iterate leaves the oracle Hessian equal to the true Hessian, so `ρ₃` is
    /// set to `ρ₁` of the function value.
    pub fn with_additive_noise(
        &self,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, CalculusError> {
        let sigma: ScalarFn = Arc::new(sigma);
        check_monotone("sigma", &*sigma, &validation_grid())?;
        let rho1 = self.rho1.clone();
        let mut out = self.clone();
        out.sigma = Some(sigma);
        out.rho3 = Some(Arc::new(move |_g, x| rho1(x)));
        Ok(out)
    }

    pub fn rho1(&self, x: f64) -> f64 {
        (self.rho1)(x)
    }

    pub fn rho2(&self, x: f64) -> Result<f64, CalculusError> {
        self.rho2
            .as_ref()
            .map(|f| f(x))
            .ok_or(CalculusError::MissingRho2)
    }

    pub fn rho3(&self, g: f64, x: f64) -> Result<f64, CalculusError> {
        self.rho3
            .as_ref()
            .map(|f| f(g, x))
            .ok_or(CalculusError::MissingRho3)
    }

    pub fn sigma(&self, x: f64) -> Result<f64, CalculusError> {
        self.sigma
            .as_ref()
            .map(|f| f(x))
            .ok_or(CalculusError::MissingSigma)
    }

    pub fn has_rho2(&self) -> bool {
        self.rho2.is_some()
    }

    pub fn has_sigma(&self) -> bool {
        self.sigma.is_some()
    }

    pub fn sigma_fn(&self) -> Option<ScalarFn> {
        self.sigma.clone()
    }

    pub fn theta(&self, x: f64) -> Result<f64, CalculusError> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(CalculusError::InvalidArgument(format!(
                "theta needs a finite non-negative argument, got {x}"
            )));
        }
        Ok(integrate_reciprocal(&*self.rho1, 0.0, x, DEFAULT_QUAD_TOL)?)
    }

    pub fn rho0(&self, x: f64) -> Result<f64, CalculusError> {
        if let Some(ov) = &self.rho0_override {
            if !(x.is_finite() && x >= 0.0) {
                return Err(CalculusError::InvalidArgument(format!(
                    "rho0 needs a finite non-negative argument, got {x}"
                )));
            }
            return Ok(ov(x));
        }
        let r1 = self.rho1(x);
        let th = self.theta(x)?;
        if th == 0.0 {
            return Ok(0.0);
        }
        Ok(r1 * (2.0 * th).sqrt())
    }

    pub fn effective_constants(&self, f0: f64) -> Result<EffectiveConstants, CalculusError> {
        if !(f0.is_finite() && f0 >= 0.0) {
            return Err(CalculusError::InvalidArgument(format!(
                "F0 must be finite and non-negative, got {f0}"
            )));
        }
        let r0 = self.rho0(f0)?;
        let r1p = self.rho0(f0 + 1.0)?;
        let l1_prime = self.rho1(f0 + 1.0);
        let l1 = 1f64.max(r1p).max(r0 * r1p).max(l1_prime);
        let l2 = match &self.rho2 {
            Some(f) => Some(1f64.max(l1).max(f(f0 + 1.0))),
            None => None,
        };
        Ok(EffectiveConstants {
            f0,
            l1,
            l1_prime,
            l2,
            rho0_at_f0: r0,
            rho0_at_f0_plus1: r1p,
        })
    }

    pub fn restarted_noise_constants(
        &self,
        f0: f64,
    ) -> Result<RestartedNoiseConstants, CalculusError> {
        if !(f0.is_finite() && f0 >= 0.0) {
            return Err(CalculusError::InvalidArgument(format!(
                "F0 must be finite and non-negative, got {f0}"
            )));
        }
        let sigma_prime = self.sigma(f0 + 1.0)?;
        let rho3 = self.rho3.as_ref().ok_or(CalculusError::MissingRho3)?;
        let sigma_tilde = 2.0 * sigma_prime;
        let sigma1 = (sigma_prime + sigma_tilde).max(1.0);
        let r0 = self.rho0(f0 + 1.0)?;
        let l1_rsgd = 1f64
            .max(self.rho1(f0 + 1.0))
            .max(rho3(r0 + sigma_prime, f0 + 1.0));
        let spread = (sigma1 + r0).powi(2);
        let l2_rsgd = 1f64
            .max(self.rho2(f0 + 1.0)?)
            .max(r0 * r0 * spread.max(4.0));
        Ok(RestartedNoiseConstants {
            sigma_prime,
            sigma_tilde,
            sigma1,
            l1_rsgd,
            l2_rsgd,
        })
    }
}

/// Profile of an `(L₀, L₁)`-smooth function, i.e. `‖∇²F‖ ≤ L₀ + L₁‖∇F‖`:
/// `ρ₁(x) = 3L₀/2 + 4L₁²x` with the closed-form envelope
/// `ρ₀(x) = 2√L₀·√x + 5L₁²/√L₀·x^{3/2}`.
///
/// `L₀ = 0` is rejected: `ρ₁(0)` then vanishes and the envelope is undefined.
pub fn from_l0_l1(l0: f64, l1s: f64) -> Result<SelfBoundingProfile, CalculusError> {
    if !(l0.is_finite() && l0 > 0.0 && l1s.is_finite() && l1s >= 0.0) {
        return Err(CalculusError::InvalidArgument(format!(
            "need L0 > 0 and L1 >= 0 finite, got L0 = {l0}, L1 = {l1s}"
        )));
    }
    let a = 1.5 * l0;
    let b = 4.0 * l1s * l1s;
    let c0 = 2.0 * l0.sqrt();
    let c1 = 5.0 * l1s * l1s / l0.sqrt();
    SelfBoundingProfile::builder(move |x| a + b * x)
        .rho0_override(move |x| c0 * x.sqrt() + c1 * x.powf(1.5))
        .build()
}
