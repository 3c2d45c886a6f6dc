//! First- and second-order stationarity certificates.

use thiserror::Error;

use crate::numerics::{sym_eig_min, NumericsError, Vector};
use crate::problems::{MatrixPcaSpec, Objective};

/// Eigensolver slack added to the curvature threshold.
pub const EIG_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationarityError {
    #[error("objective {0} has no analytic Hessian")]
    MissingHessian(String),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub grad_norm: f64,
    pub lambda_min: Option<f64>,
    pub is_fosp: bool,
    pub is_sosp: Option<bool>,
    pub dist_to_optimum: Option<f64>,
}

/// `ε`-FOSP test `‖∇F(w)‖ ≤ ε`, and with `want_sosp` the additional
/// `λ_min(∇²F(w)) ≥ −√ε`.
pub fn check(
    obj: &Objective,
    w: &Vector,
    eps: f64,
    want_sosp: bool,
) -> Result<StationarityReport, StationarityError> {
    if !(eps > 0.0) {
        return Err(StationarityError::InvalidTolerance(eps));
    }
    check_thresholds(obj, w, eps, want_sosp.then(|| eps.sqrt()))
}

/// Same as [`check`] with independent gradient and curvature thresholds:
/// FOSP means `‖∇F‖ ≤ grad_tol`, SOSP additionally `λ_min > −curvature_tol`.
pub fn check_thresholds(
    obj: &Objective,
    w: &Vector,
    grad_tol: f64,
    curvature_tol: Option<f64>,
) -> Result<StationarityReport, StationarityError> {
    let grad_norm = obj.gradient(w).norm();
    let is_fosp = grad_norm <= grad_tol;
    let (lambda_min, is_sosp) = match curvature_tol {
        None => (None, None),
        Some(tol) => {
            let h = obj
                .hessian(w)
                .ok_or_else(|| StationarityError::MissingHessian(obj.name().to_string()))?;
            let (lam, _) = sym_eig_min(&h)?;
            (Some(lam), Some(is_fosp && lam > -tol - EIG_SLACK))
        }
    };
    Ok(StationarityReport {
        grad_norm,
        lambda_min,
        is_fosp,
        is_sosp,
        dist_to_optimum: obj.distance_to_optimum(w),
    })
}

/// `min ‖w ∓ √λ₁·v₁‖`.
pub fn pca_optimum_distance(spec: &MatrixPcaSpec, w: &Vector) -> f64 {
    let o = spec.optimum();
    (w - &o).norm().min((w + &o).norm())
}
