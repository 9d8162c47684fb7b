use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Curvature below which a step is considered degenerate.
pub const DEGENERATE_CURVATURE: f64 = 1e-30;
/// Powell damping threshold on `s'y / s'Bs`.
pub const DAMPING_THRESHOLD: f64 = 0.2;

/// Positive-definite quasi-Newton approximation `B = L L'` of the Lagrangian
/// Hessian. `B` is kept explicitly and refactored after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianApprox {
    b: DMatrix<f64>,
    l: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BfgsUpdate {
    Plain,
    /// Powell damping engaged with the given `theta`.
    Damped(f64),
    /// The updated matrix failed to factor and was reset to the identity.
    Reset,
}

impl HessianApprox {
    pub fn identity(n: usize) -> Self {
        HessianApprox {
            b: DMatrix::identity(n, n),
            l: DMatrix::identity(n, n),
        }
    }

    /// Builds the approximation from an explicit SPD matrix.
    pub fn from_matrix(b: DMatrix<f64>) -> Option<Self> {
        let l = Cholesky::new(b.clone())?.l();
        Some(HessianApprox { b, l })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Lower-triangular Cholesky factor.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn reset(&mut self) {
        *self = HessianApprox::identity(self.b.nrows());
    }

    pub fn is_identity(&self) -> bool {
        self.b == DMatrix::identity(self.b.nrows(), self.b.ncols())
    }

    /// Powell-damped BFGS update. On a degenerate step the approximation is
    /// left unchanged and `DegenerateStep` is returned.
    pub fn bfgs_update(&mut self, s: &DVector<f64>, y: &DVector<f64>) -> Result<BfgsUpdate> {
        let bs = &self.b * s;
        let q = s.dot(&bs);
        if !(q > DEGENERATE_CURVATURE) || s.norm() == 0.0 {
            return Err(Error::DegenerateStep { curvature: q });
        }
        let sy = s.dot(y);
        let (ybar, kind) = if sy < DAMPING_THRESHOLD * q {
            let theta = (1.0 - DAMPING_THRESHOLD) * q / (q - sy);
            (y * theta + &bs * (1.0 - theta), BfgsUpdate::Damped(theta))
        } else {
            (y.clone(), BfgsUpdate::Plain)
        };
        let sybar = s.dot(&ybar);
        let mut b = &self.b - &bs * bs.transpose() / q + &ybar * ybar.transpose() / sybar;
        b = (&b + b.transpose()) * 0.5;
        match Cholesky::new(b.clone()) {
            Some(chol) => {
                self.l = chol.l();
                self.b = b;
                Ok(kind)
            }
            None => {
                self.reset();
                Ok(BfgsUpdate::Reset)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secant_consistent_pair_leaves_b_unchanged() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let mut h = HessianApprox::from_matrix(b.clone()).unwrap();
        let s = DVector::from_vec(vec![0.3, -0.7]);
        let y = &b * &s;
        assert_eq!(h.bfgs_update(&s, &y).unwrap(), BfgsUpdate::Plain);
        assert!((h.matrix() - b).amax() < 1e-14);
    }

    #[test]
    fn rank_two_arithmetic() {
        let mut h = HessianApprox::identity(2);
        let s = DVector::from_vec(vec![1.0, 0.0]);
        let y = DVector::from_vec(vec![2.0, 0.0]);
        h.bfgs_update(&s, &y).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!((h.matrix() - expected).amax() < 1e-15);
        assert!((h.factor()[(0, 0)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn negative_curvature_is_damped() {
        // B = diag(1, 2), s = (1, 1): s'Bs = 3, s'y = -1
        let mut h =
            HessianApprox::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]))
                .unwrap();
        let s = DVector::from_vec(vec![1.0, 1.0]);
        let y = DVector::from_vec(vec![-1.0, 0.0]);
        let bs = h.matrix() * &s;
        let q = s.dot(&bs);
        let kind = h.bfgs_update(&s, &y).unwrap();
        let BfgsUpdate::Damped(theta) = kind else {
            panic!("expected damping, got {kind:?}")
        };
        assert!((theta - 0.8 * 3.0 / 4.0).abs() < 1e-15);
        let ybar = &y * theta + &bs * (1.0 - theta);
        assert!((s.dot(&ybar) - 0.2 * q).abs() < 1e-14);
        // secant condition on the damped pair
        assert!((h.matrix() * &s - ybar).amax() < 1e-13);
    }

    #[test]
    fn degenerate_step_is_skipped() {
        let mut h = HessianApprox::identity(2);
        let r = h.bfgs_update(&DVector::zeros(2), &DVector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(r, Err(Error::DegenerateStep { .. })));
        assert!(h.is_identity());
    }
}
