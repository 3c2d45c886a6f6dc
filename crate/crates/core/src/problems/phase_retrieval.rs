use nalgebra::DMatrix;

use crate::calculus::SelfBoundingProfile;
use crate::numerics::{RngState, SymMatrix, Vector};

use super::{Landscape, Objective, ProblemError};

/// Hidden unit vector `w*` of the population phase-retrieval loss.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRetrievalSpec {
    w_star: Vector,
}

impl PhaseRetrievalSpec {
    pub fn new(w_star: Vector) -> Result<Self, ProblemError> {
        let norm = w_star.norm();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(ProblemError::NotUnit { norm });
        }
        Ok(PhaseRetrievalSpec { w_star })
    }

    /// Uniformly random `w*` on the unit sphere.
    pub fn random(d: usize, rng: &mut RngState) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::InvalidParameter("dimension must be positive".into()));
        }
        Self::new(rng.unit_vector(d))
    }

    pub fn w_star(&self) -> &Vector {
        &self.w_star
    }
}

struct PhaseRetrieval {
    ws: Vector,
}

impl Landscape for PhaseRetrieval {
    fn dim(&self) -> usize {
        self.ws.len()
    }

    fn value(&self, w: &Vector) -> f64 {
        let n2 = w.norm_squared();
        let a = w.dot(&self.ws);
        ((n2 - a * a) + 0.75 * (n2 - 1.0).powi(2)).max(0.0)
    }

    fn gradient(&self, w: &Vector) -> Vector {
        let n2 = w.norm_squared();
        let a = w.dot(&self.ws);
        w * (2.0 + 3.0 * (n2 - 1.0)) - &self.ws * (2.0 * a)
    }

    fn hessian(&self, w: &Vector) -> Option<SymMatrix> {
        let d = w.len();
        let n2 = w.norm_squared();
        let h = DMatrix::identity(d, d) * (2.0 + 3.0 * (n2 - 1.0))
            - &self.ws * self.ws.transpose() * 2.0
            + w * w.transpose() * 6.0;
        Some(SymMatrix::symmetrized(h))
    }

    fn has_hessian(&self) -> bool {
        true
    }
}

/// `F(w) = wᵀ(I − w*w*ᵀ)w + ¾(‖w‖² − 1)²` with `ρ₁(x) = 9√x + 10` and
/// `ρ₂(x) = 18x + 37`. Minimizers are `±w*`; `0` is a strict saddle with
/// curvature `−3` along `w*`.
///
/// The Hessian bound `ρ₁` holds on the sublevel sets `{F ≤ 8}`; beyond
/// `F ≈ 8.3` the curvature along `w*` outgrows it.
pub fn phase_retrieval(spec: PhaseRetrievalSpec) -> Objective {
    let profile = SelfBoundingProfile::builder(|x| 9.0 * x.sqrt() + 10.0)
        .rho2(|x| 18.0 * x + 37.0)
        .build()
        .expect("phase retrieval profile is monotone and positive");
    let d = spec.w_star.len();
    let optima = vec![spec.w_star.clone(), -spec.w_star.clone()];
    Objective::new("phase_retrieval", PhaseRetrieval { ws: spec.w_star }, profile)
        .with_param("dim", d as f64)
        .with_optima(optima)
}
