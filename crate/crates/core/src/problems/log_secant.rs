use std::f64::consts::FRAC_PI_2;

use crate::calculus::SelfBoundingProfile;
use crate::numerics::{SymMatrix, Vector};

use super::{Landscape, Objective};

/// Open domain `(LOG_SECANT_LO, LOG_SECANT_HI)` on which `cos(1 + x) > 0`,
/// with a `1e-6` margin on both sides.
pub const LOG_SECANT_LO: f64 = -1.0 - FRAC_PI_2 + 1e-6;
pub const LOG_SECANT_HI: f64 = FRAC_PI_2 - 1.0 - 1e-6;

struct LogSecant;

impl Landscape for LogSecant {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, w: &Vector) -> f64 {
        if !self.contains(w) {
            return f64::NAN;
        }
        1.0 - (1.0 + w[0]).cos().ln()
    }

    fn gradient(&self, w: &Vector) -> Vector {
        Vector::from_element(1, (1.0 + w[0]).tan())
    }

    fn hessian(&self, w: &Vector) -> Option<SymMatrix> {
        let c = (1.0 + w[0]).cos();
        Some(SymMatrix::from_diagonal(&[1.0 / (c * c)]))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn contains(&self, w: &Vector) -> bool {
        w.len() == 1 && w[0] > LOG_SECANT_LO && w[0] < LOG_SECANT_HI
    }
}

/// `F(x) = 1 − log cos(1 + x)`, a univariate function whose curvature
/// `F″(x) = sec²(1 + x) = e^{2(F(x) − 1)}` is exactly the profile
/// `ρ₁(t) = e^{2(t − 1)}`. Its minimum value 1 is attained at `x = −1`.
/// Outside the domain `value` is NaN.
pub fn log_secant() -> Objective {
    let profile = SelfBoundingProfile::builder(|t| (2.0 * (t - 1.0)).exp())
        .rho2(|t| {
            let e = (2.0 * (t - 1.0)).exp();
            2.0 * e * (e - 1.0).max(0.0).sqrt()
        })
        .build()
        .expect("log-secant profile is monotone and positive");
    Objective::new("log_secant", LogSecant, profile)
        .with_param("dim", 1.0)
        .with_optima(vec![Vector::from_element(1, -1.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::testutil::*;
    use approx::assert_abs_diff_eq;

    fn x(v: f64) -> Vector {
        Vector::from_element(1, v)
    }

    #[test]
    fn known_values() {
        let f = log_secant();
        assert_abs_diff_eq!(f.value(&x(0.0)), 1.615_626_470_386_014, epsilon = 1e-12);
        assert_abs_diff_eq!(f.gradient(&x(0.0))[0], 1.557_407_724_654_902, epsilon = 1e-12);
        assert_eq!(f.value(&x(-1.0)), 1.0);
    }

    #[test]
    fn curvature_equals_profile() {
        let f = log_secant();
        for k in 0..100 {
            let v = k as f64 / 100.0 * LOG_SECANT_HI;
            let h = f.hessian(&x(v)).unwrap().as_matrix()[(0, 0)];
            let rho = f.profile().rho1(f.value(&x(v)));
            assert!((h - rho).abs() <= 1e-10 * h.max(1.0), "x={v}: {h} vs {rho}");
        }
    }

    #[test]
    fn domain() {
        let f = log_secant();
        assert!(f.check_domain(&x(0.5)).is_ok());
        assert!(f.check_domain(&x(0.6)).is_err());
        assert!(f.check_domain(&x(-2.6)).is_err());
        assert!(f.value(&x(1.0)).is_nan());
        assert!(f.check_domain(&Vector::zeros(2)).is_err());
    }

    #[test]
    fn finite_difference_consistency() {
        let f = log_secant();
        for k in 0..100 {
            let v = -2.4 + 2.9 * k as f64 / 99.0;
            let w = x(v);
            assert!(rel_err(&f.gradient(&w), &fd_gradient(&f, &w, 1e-5)) <= 1e-5);
            let h = f.hessian(&w).unwrap();
            assert!(rel_err_mat(h.as_matrix(), &fd_hessian(&f, &w, 1e-5)) <= 1e-5);
        }
    }

    #[test]
    fn third_order_bound() {
        let f = log_secant();
        for k in 0..100 {
            let v = -2.4 + 2.9 * k as f64 / 99.0;
            let t = (1.0 + v).tan();
            let c = (1.0 + v).cos();
            let third = (2.0 * t / (c * c)).abs();
            let bound = f.profile().rho2(f.value(&x(v))).unwrap();
            assert!(third <= bound * (1.0 + 1e-9) + 1e-12);
        }
    }
}
