use nalgebra::DMatrix;

use crate::calculus::SelfBoundingProfile;
use crate::numerics::{sym_eigen, RngState, SymMatrix, Vector};

use super::{Landscape, Objective, ProblemError};

/// Positive definite `M` with its eigendecomposition, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct MatrixPcaSpec {
    m: SymMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vector>,
}

impl MatrixPcaSpec {
    pub fn new(m: SymMatrix) -> Result<Self, ProblemError> {
        let eig = sym_eigen(&m)?;
        let d = m.dim();
        let lambda_min = eig.values[0];
        if !(lambda_min > 0.0) {
            return Err(ProblemError::NotPositiveDefinite { lambda_min });
        }
        let eigenvalues = (0..d).rev().map(|k| eig.values[k]).collect();
        let eigenvectors = (0..d).rev().map(|k| eig.vector(k)).collect();
        Ok(MatrixPcaSpec {
            m,
            eigenvalues,
            eigenvectors,
        })
    }

    /// `M = Q diag(spectrum) Qᵀ` for a random orthogonal `Q`.
    pub fn from_spectrum(spectrum: &[f64], rng: &mut RngState) -> Result<Self, ProblemError> {
        let d = spectrum.len();
        if d == 0 {
            return Err(ProblemError::InvalidParameter("empty spectrum".into()));
        }
        let g = DMatrix::from_fn(d, d, |_, _| rng.standard_normal());
        let q = g.qr().q();
        let lam = DMatrix::from_diagonal(&Vector::from_column_slice(spectrum));
        let m = &q * lam * q.transpose();
        Self::new(SymMatrix::symmetrized(m))
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.m
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &Vector {
        &self.eigenvectors[k]
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `λ₁ − λ₂`, or `λ₁` in one dimension.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0] - self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    pub fn op_norm(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `√λ₁·v₁`; the other minimizer is its negative.
    pub fn optimum(&self) -> Vector {
        &self.eigenvectors[0] * self.lambda1().sqrt()
    }
}

struct MatrixPca {
    m: DMatrix<f64>,
    lambda1: f64,
}

impl Landscape for MatrixPca {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn value(&self, w: &Vector) -> f64 {
        let n2 = w.norm_squared();
        let quad = w.dot(&(&self.m * w));
        (0.25 * (n2 * n2 - 2.0 * quad + self.lambda1 * self.lambda1)).max(0.0)
    }

    fn gradient(&self, w: &Vector) -> Vector {
        w * w.norm_squared() - &self.m * w
    }

    fn hessian(&self, w: &Vector) -> Option<SymMatrix> {
        let d = w.len();
        let h = DMatrix::identity(d, d) * w.norm_squared() + w * w.transpose() * 2.0 - &self.m;
        Some(SymMatrix::symmetrized(h))
    }

    fn has_hessian(&self) -> bool {
        true
    }
}

/// `F(w) = ¼‖wwᵀ − M‖²_F − min F`, whose gradient is `(wwᵀ − M)w`.
///
/// `ρ₁(x) = 3(2x^{1/4} + ‖M‖^{1/2})² + ‖M‖`. The Hessian changes at rate
/// `6‖w‖` along `w`, so the third-order bound is `ρ₂(x) = 12x^{1/4} + 6‖M‖^{1/2}`.
pub fn matrix_pca(spec: MatrixPcaSpec) -> Objective {
    let norm = spec.op_norm();
    let sq = norm.sqrt();
    let profile = SelfBoundingProfile::builder(move |x| 3.0 * (2.0 * x.powf(0.25) + sq).powi(2) + norm)
        .rho2(move |x| 12.0 * x.powf(0.25) + 6.0 * sq)
        .build()
        .expect("PCA profile is monotone and positive");
    let opt = spec.optimum();
    let d = spec.m.dim();
    Objective::new(
        "matrix_pca",
        MatrixPca {
            m: spec.m.as_matrix().clone(),
            lambda1: spec.lambda1(),
        },
        profile,
    )
    .with_param("dim", d as f64)
    .with_param("lambda1", spec.lambda1())
    .with_param("gap", spec.gap())
    .with_optima(vec![opt.clone(), -opt])
}
