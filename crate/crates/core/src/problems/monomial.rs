use nalgebra::DMatrix;

use crate::calculus::SelfBoundingProfile;
use crate::numerics::{SymMatrix, Vector};

use super::{Landscape, Objective, ProblemError};

/// `‖Aw‖^p` with diagonal `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialNormSpec {
    diag: Vec<f64>,
    p: u32,
}

impl MonomialNormSpec {
    pub fn new(diag: Vec<f64>, p: u32) -> Result<Self, ProblemError> {
        if p < 2 {
            return Err(ProblemError::UnsupportedExponent(p));
        }
        if diag.is_empty() || diag.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(ProblemError::InvalidParameter(
                "diagonal of A must be positive and finite".into(),
            ));
        }
        Ok(MonomialNormSpec { diag, p })
    }

    /// `A = diag(1/d, 1/(d−1), …, 1/2, 1)`; `d = 20` is the standard instance.
    pub fn harmonic(d: usize, p: u32) -> Result<Self, ProblemError> {
        Self::new((0..d).map(|i| 1.0 / (d - i) as f64).collect(), p)
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `‖A‖_op`.
    pub fn a_norm(&self) -> f64 {
        self.diag.iter().cloned().fold(0.0, f64::max)
    }
}

struct MonomialNorm {
    k: Vec<f64>,
    p: u32,
}

impl MonomialNorm {
    fn q(&self, w: &Vector) -> f64 {
        self.k.iter().zip(w.iter()).map(|(k, x)| k * x * x).sum()
    }

    fn pow_half(q: f64, e: i32) -> f64 {
        // q^{e/2}, exact integer powers when e is even.
        if e % 2 == 0 {
            q.powi(e / 2)
        } else {
            q.sqrt().powi(e)
        }
    }
}

impl Landscape for MonomialNorm {
    fn dim(&self) -> usize {
        self.k.len()
    }

    fn value(&self, w: &Vector) -> f64 {
        Self::pow_half(self.q(w), self.p as i32)
    }

    fn gradient(&self, w: &Vector) -> Vector {
        let q = self.q(w);
        let p = self.p as i32;
        let scale = if p == 2 {
            2.0
        } else if q == 0.0 {
            0.0
        } else {
            p as f64 * Self::pow_half(q, p - 2)
        };
        Vector::from_fn(self.k.len(), |i, _| scale * self.k[i] * w[i])
    }

    fn hessian(&self, w: &Vector) -> Option<SymMatrix> {
        let d = self.k.len();
        let q = self.q(w);
        let p = self.p as i32;
        let kmat = DMatrix::from_diagonal(&Vector::from_column_slice(&self.k));
        if p == 2 {
            return Some(SymMatrix::symmetrized(kmat * 2.0));
        }
        if q == 0.0 {
            return Some(SymMatrix::symmetrized(DMatrix::zeros(d, d)));
        }
        let kw = Vector::from_fn(d, |i, _| self.k[i] * w[i]);
        let pf = p as f64;
        let h = kmat * (pf * Self::pow_half(q, p - 2))
            + &kw * kw.transpose() * (pf * (pf - 2.0) * Self::pow_half(q, p - 4));
        Some(SymMatrix::symmetrized(h))
    }

    fn has_hessian(&self) -> bool {
        true
    }
}

/// `F(w) = ‖Aw‖^p`.
///
/// With `a = ‖Aw‖`, the Hessian norm is at most `p(p−1)‖A‖²a^{p−2}` and the
/// third derivative at most `‖A‖³(12|m(m−1)| + 8|m(m−1)(m−2)|)a^{p−3}` where
/// `m = p/2`. Writing `a^k = x^{k/p}` and adding 1 to keep `ρ₁(0) > 0` gives
/// the envelopes used here. For `p = 2` the function is `‖A‖²`-smooth in the
/// classical sense and the profile is constant.
pub fn monomial_norm(spec: MonomialNormSpec) -> Objective {
    let an = spec.a_norm();
    let p = spec.p;
    let pf = p as f64;
    let profile = if p == 2 {
        SelfBoundingProfile::constant(2.0 * an * an).expect("positive curvature")
    } else {
        let c1 = pf * (pf - 1.0) * an * an;
        let m = pf / 2.0;
        let c2 = an.powi(3) * (8.0 * (m * (m - 1.0) * (m - 2.0)).abs() + 12.0 * (m * (m - 1.0)).abs());
        let e1 = (pf - 2.0) / pf;
        let e2 = (pf - 3.0) / pf;
        SelfBoundingProfile::builder(move |x| c1 * (1.0 + x.powf(e1)))
            .rho2(move |x| c2 * (1.0 + x.powf(e2)))
            .build()
            .expect("monomial envelope is monotone and positive")
    };
    let d = spec.diag.len();
    let k = spec.diag.iter().map(|a| a * a).collect();
    Objective::new("monomial_norm", MonomialNorm { k, p }, profile)
        .with_param("dim", d as f64)
        .with_param("p", pf)
        .with_optima(vec![Vector::zeros(d)])
}
