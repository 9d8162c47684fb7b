use nalgebra::{DMatrix, DVector};

use super::ldp::ldp;
use crate::error::LsqError;
use crate::linalg::{solve_upper, solve_upper_transpose, Householder};

#[derive(Debug, Clone, PartialEq)]
pub struct LsiSolution {
    pub x: DVector<f64>,
    pub multipliers: DVector<f64>,
    pub rnorm: f64,
}

/// Least squares with inequalities: `min |Ax - b|` subject to `Gx >= h`.
///
/// With `A = QR`, the substitution `z = Rx - Q1'b` turns the problem into an
/// LDP over `z`. `A` must have full column rank.
pub fn lsi(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Result<LsiSolution, LsqError> {
    let (p, q) = a.shape();
    if b.len() != p || g.ncols() != q || h.len() != g.nrows() {
        return Err(LsqError::Dimension);
    }
    if p < q {
        return Err(LsqError::RankDeficient);
    }
    if q == 0 {
        if h.iter().any(|&v| v > 0.0) {
            return Err(LsqError::Infeasible);
        }
        return Ok(LsiSolution {
            x: DVector::zeros(0),
            multipliers: DVector::zeros(h.len()),
            rnorm: b.norm(),
        });
    }
    let qr = Householder::new(a.clone());
    if !qr.is_full_rank() {
        return Err(LsqError::RankDeficient);
    }
    let r = qr.r().view((0, 0), (q, q)).into_owned();
    let mut qtb = b.clone();
    qr.apply_qt(&mut qtb);
    let f1 = qtb.rows(0, q).into_owned();
    let f2 = qtb.rows(q, p - q).norm();

    // G R^{-1}, one row at a time
    let mut gt = DMatrix::zeros(g.nrows(), q);
    for i in 0..g.nrows() {
        let row = solve_upper_transpose(&r, &g.row(i).transpose());
        gt.set_row(i, &row.transpose());
    }
    let ht = h - &gt * &f1;
    let sol = ldp(&gt, &ht)?;
    let x = solve_upper(&r, &(&sol.x + &f1));
    Ok(LsiSolution {
        rnorm: (sol.x.norm_squared() + f2 * f2).sqrt(),
        x,
        multipliers: sol.multipliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_halfplane() {
        let s = lsi(
            &DMatrix::identity(2, 2),
            &DVector::zeros(2),
            &DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            &DVector::from_vec(vec![1.0]),
        )
        .unwrap();
        assert!((s.x - DVector::from_vec(vec![1.0, 0.0])).amax() < 1e-14);
        assert!((s.multipliers[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn no_inequalities_is_least_squares() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let s = lsi(&a, &b, &DMatrix::zeros(0, 2), &DVector::zeros(0)).unwrap();
        // normal equations
        let expected = (a.transpose() * &a)
            .lu()
            .solve(&(a.transpose() * &b))
            .unwrap();
        assert!((s.x - expected).amax() < 1e-12);
    }

    #[test]
    fn rank_deficient_a() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let r = lsi(
            &a,
            &DVector::zeros(2),
            &DMatrix::zeros(0, 2),
            &DVector::zeros(0),
        );
        assert_eq!(r, Err(LsqError::RankDeficient));
    }
}
