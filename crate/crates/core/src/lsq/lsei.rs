use nalgebra::{DMatrix, DVector};

use super::lsi::lsi;
use crate::error::LsqError;
use crate::linalg::{solve_upper, solve_upper_transpose, Householder};

#[derive(Debug, Clone, PartialEq)]
pub struct LseiSolution {
    pub x: DVector<f64>,
    pub eq_multipliers: DVector<f64>,
    pub ineq_multipliers: DVector<f64>,
    pub rnorm: f64,
}

/// `min |Ax - b|` subject to `Ex = f` and `Gx >= h`.
///
/// `E' = Q [R; 0]` splits `x = Q1 y1 + Q2 y2`; the equalities fix `y1` and the
/// remaining LSI runs over `y2` on the null space of `E`.
pub fn lsei(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    f: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Result<LseiSolution, LsqError> {
    let q = a.ncols();
    let me = e.nrows();
    if e.ncols() != q
        || f.len() != me
        || g.ncols() != q
        || h.len() != g.nrows()
        || b.len() != a.nrows()
    {
        return Err(LsqError::Dimension);
    }
    if me == 0 {
        let s = lsi(a, b, g, h)?;
        return Ok(LseiSolution {
            x: s.x,
            eq_multipliers: DVector::zeros(0),
            ineq_multipliers: s.multipliers,
            rnorm: s.rnorm,
        });
    }
    if me > q {
        return Err(LsqError::RankDeficient);
    }
    let qr = Householder::new(e.transpose());
    if !qr.is_full_rank() {
        return Err(LsqError::RankDeficient);
    }
    let re = qr.r().view((0, 0), (me, me)).into_owned();
    let y1 = solve_upper_transpose(&re, f);
    let qm = qr.q();
    let q1 = qm.columns(0, me).into_owned();
    let q2 = qm.columns(me, q - me).into_owned();
    let x1 = &q1 * &y1;

    let (x, lambda, rnorm) = if me == q {
        let slack = g * &x1 - h;
        let tol = 1e-10 * (1.0 + h.amax());
        if slack.iter().any(|&s| s < -tol) {
            return Err(LsqError::Infeasible);
        }
        let rnorm = (a * &x1 - b).norm();
        (x1, DVector::zeros(g.nrows()), rnorm)
    } else {
        let s = lsi(&(a * &q2), &(b - a * &x1), &(g * &q2), &(h - g * &x1))?;
        (x1 + &q2 * &s.x, s.multipliers, s.rnorm)
    };

    // A'(Ax - b) - G'lambda = E'mu  =>  R mu = Q1'(...)
    let stationarity = a.tr_mul(&(a * &x - b)) - g.tr_mul(&lambda);
    let mu = solve_upper(&re, &q1.tr_mul(&stationarity));
    Ok(LseiSolution {
        x,
        eq_multipliers: mu,
        ineq_multipliers: lambda,
        rnorm,
    })
}
