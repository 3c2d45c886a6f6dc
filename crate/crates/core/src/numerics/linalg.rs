use nalgebra::{DMatrix, DVector};

use super::NumericsError;

/// Dense column vector used for every iterate.
pub type Vector = DVector<f64>;

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_MAX_DIM: usize = 512;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Checks that every entry is finite and hands the vector back.
pub fn finite_vector(v: Vector) -> Result<Vector, NumericsError> {
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(NumericsError::NonFiniteVector { index, value });
    }
    Ok(v)
}

/// A finite symmetric matrix.
///
/// Construction through [`SymMatrix::new`] rejects asymmetry beyond a relative
/// tolerance of `1e-12` and stores the exact symmetric part.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self, NumericsError> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(NumericsError::NotSquare { rows, cols });
        }
        let mut scale: f64 = 1.0;
        for j in 0..cols {
            for i in 0..rows {
                let a = m[(i, j)];
                if !a.is_finite() {
                    return Err(NumericsError::NonFiniteMatrix { row: i, col: j });
                }
                scale = scale.max(a.abs());
            }
        }
        for i in 0..rows {
            for j in (i + 1)..cols {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > SYMMETRY_TOL * scale {
                    return Err(NumericsError::NotSymmetric { row: i, col: j, gap });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Replaces `m` by `(m + mᵀ)/2` without validation. Intended for analytic
    /// Hessians that are symmetric by construction up to rounding.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn identity(d: usize) -> Self {
        SymMatrix(DMatrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn shifted(&self, c: f64) -> Self {
        let d = self.dim();
        SymMatrix(&self.0 + DMatrix::identity(d, d) * c)
    }

    /// Spectral norm, i.e. the largest eigenvalue magnitude.
    pub fn op_norm(&self) -> Result<f64, NumericsError> {
        let eig = sym_eigen(self)?;
        Ok(eig
            .values
            .iter()
            .fold(0.0_f64, |acc, &lam| acc.max(lam.abs())))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vector {
        self.vectors.column(k).into_owned()
    }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eigen(h: &SymMatrix) -> Result<SymEigen, NumericsError> {
    let n = h.dim();
    if n == 0 {
        return Err(NumericsError::Empty);
    }
    if n > DENSE_MAX_DIM {
        return Err(NumericsError::DimensionExceeded {
            dim: n,
            max: DENSE_MAX_DIM,
        });
    }
    // Row-major working copies; `a` converges to diagonal, `v` accumulates rotations.
    let mut a: Vec<f64> = (0..n * n).map(|k| h.0[(k / n, k % n)]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = DMatrix::from_fn(n, n, |row, col| v[row * n + order[col]]);
    Ok(SymEigen { values, vectors })
}

/// Smallest eigenvalue and a unit eigenvector.
pub fn sym_eig_min(h: &SymMatrix) -> Result<(f64, Vector), NumericsError> {
    let eig = sym_eigen(h)?;
    let v = eig.vector(0);
    Ok((eig.values[0], v))
}
