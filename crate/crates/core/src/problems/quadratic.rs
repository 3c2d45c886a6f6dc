use crate::calculus::SelfBoundingProfile;
use crate::numerics::{SymMatrix, Vector};

use super::{Landscape, Objective, ProblemError};

struct DiagonalQuadratic {
    a: Vec<f64>,
}

impl Landscape for DiagonalQuadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, w: &Vector) -> f64 {
        0.5 * self.a.iter().zip(w.iter()).map(|(a, x)| a * x * x).sum::<f64>()
    }

    fn gradient(&self, w: &Vector) -> Vector {
        Vector::from_fn(self.a.len(), |i, _| self.a[i] * w[i])
    }

    fn hessian(&self, _w: &Vector) -> Option<SymMatrix> {
        Some(SymMatrix::from_diagonal(&self.a))
    }

    fn has_hessian(&self) -> bool {
        true
    }
}

/// `F(w) = ½ Σ aᵢ wᵢ²` with every `aᵢ > 0`; the profile is the constant
/// `ρ₁ ≡ max aᵢ`.
pub fn quadratic(diag: Vec<f64>) -> Result<Objective, ProblemError> {
    if diag.is_empty() || diag.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(ProblemError::InvalidParameter(
            "quadratic curvatures must be positive and finite".into(),
        ));
    }
    let l = diag.iter().cloned().fold(0.0, f64::max);
    let d = diag.len();
    let profile = SelfBoundingProfile::constant(l)?;
    Ok(Objective::new("quadratic", DiagonalQuadratic { a: diag }, profile)
        .with_param("dim", d as f64)
        .with_param("max_curvature", l)
        .with_optima(vec![Vector::zeros(d)]))
}
