use nalgebra::{DMatrix, DVector};

use super::lsei::{lsei, LseiSolution};
use crate::error::{Error, LsqError};
use crate::linalg::solve_lower;

/// `min 1/2 d'Bd + g'd` subject to `Ceq d + deq = 0`, `Cin d + din >= 0` and
/// `dl <= d <= du`, with `B = L L'`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSubproblem {
    pub l: DMatrix<f64>,
    pub g: DVector<f64>,
    pub ceq: DMatrix<f64>,
    pub deq: DVector<f64>,
    pub cin: DMatrix<f64>,
    pub din: DVector<f64>,
    pub dl: DVector<f64>,
    pub du: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub d: DVector<f64>,
    /// Equalities first, then inequalities; `g + Bd = sum lambda_i grad c_i`
    /// plus bound terms.
    pub lambda: DVector<f64>,
    pub relaxed: bool,
    /// Fraction of the linearized constraint values given up by the
    /// relaxation (0 when not relaxed).
    pub relax_value: f64,
}

impl QpSubproblem {
    pub fn n(&self) -> usize {
        self.g.len()
    }

    fn check(&self) -> Result<(), LsqError> {
        let n = self.n();
        let ok = self.l.shape() == (n, n)
            && self.ceq.ncols() == n
            && self.cin.ncols() == n
            && self.ceq.nrows() == self.deq.len()
            && self.cin.nrows() == self.din.len()
            && self.dl.len() == n
            && self.du.len() == n;
        if ok {
            Ok(())
        } else {
            Err(LsqError::Dimension)
        }
    }
}

/// Solves the subproblem; falls back to the relaxed problem when the
/// linearized constraints are incompatible.
pub fn solve_qp(qp: &QpSubproblem) -> Result<QpSolution, Error> {
    qp.check()?;
    match solve_direct(qp) {
        Ok(sol) => Ok(sol),
        Err(LsqError::Infeasible | LsqError::RankDeficient) => {
            solve_relaxed(qp).map_err(|_| Error::QpUnsolvable)
        }
        Err(e) => Err(e.into()),
    }
}

fn solve_direct(qp: &QpSubproblem) -> Result<QpSolution, LsqError> {
    let n = qp.n();
    let a = qp.l.transpose();
    let b = -solve_lower(&qp.l, &qp.g);
    let (g, h) = inequality_block(qp, n, None);
    let sol = lsei(&a, &b, &qp.ceq, &(-&qp.deq), &g, &h)?;
    Ok(QpSolution {
        lambda: multipliers(qp, &sol),
        d: sol.x,
        relaxed: false,
        relax_value: 0.0,
    })
}

/// Unknowns `(d, xi)` with `xi` in `[0, 1]`: equalities and violated
/// inequalities keep only the fraction `1 - xi` of their current value, and
/// `xi` is penalised by `1/2 rho xi^2` with `rho = 100 |g| + 1`.
fn solve_relaxed(qp: &QpSubproblem) -> Result<QpSolution, LsqError> {
    let n = qp.n();
    let rho = 100.0 * qp.g.norm() + 1.0;
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&qp.l.transpose());
    a[(n, n)] = rho.sqrt();
    let mut b = DVector::zeros(n + 1);
    b.rows_mut(0, n).copy_from(&(-solve_lower(&qp.l, &qp.g)));

    let meq = qp.ceq.nrows();
    let mut e = DMatrix::zeros(meq, n + 1);
    e.view_mut((0, 0), (meq, n)).copy_from(&qp.ceq);
    for i in 0..meq {
        e[(i, n)] = -qp.deq[i];
    }
    let (g, h) = inequality_block(qp, n + 1, Some(n));
    let sol = lsei(&a, &b, &e, &(-&qp.deq), &g, &h)?;
    let xi = sol.x[n].clamp(0.0, 1.0);
    Ok(QpSolution {
        lambda: multipliers(qp, &sol),
        d: sol.x.rows(0, n).into_owned(),
        relaxed: true,
        relax_value: xi,
    })
}

/// Linearized inequalities followed by the finite step bounds; with a
/// relaxation column, violated rows get the `xi` coefficient and `0 <= xi <= 1`
/// is appended.
fn inequality_block(
    qp: &QpSubproblem,
    cols: usize,
    relax: Option<usize>,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = qp.n();
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for i in 0..qp.cin.nrows() {
        let mut row: Vec<(usize, f64)> = (0..n).map(|j| (j, qp.cin[(i, j)])).collect();
        if let Some(k) = relax {
            if qp.din[i] < 0.0 {
                row.push((k, -qp.din[i]));
            }
        }
        rows.push((row, -qp.din[i]));
    }
    for j in 0..n {
        if qp.dl[j].is_finite() {
            rows.push((vec![(j, 1.0)], qp.dl[j]));
        }
    }
    for j in 0..n {
        if qp.du[j].is_finite() {
            rows.push((vec![(j, -1.0)], -qp.du[j]));
        }
    }
    if let Some(k) = relax {
        rows.push((vec![(k, 1.0)], 0.0));
        rows.push((vec![(k, -1.0)], -1.0));
    }
    let mut g = DMatrix::zeros(rows.len(), cols);
    let mut h = DVector::zeros(rows.len());
    for (i, (row, rhs)) in rows.into_iter().enumerate() {
        for (j, v) in row {
            g[(i, j)] = v;
        }
        h[i] = rhs;
    }
    (g, h)
}

fn multipliers(qp: &QpSubproblem, sol: &LseiSolution) -> DVector<f64> {
    let meq = qp.ceq.nrows();
    let mineq = qp.cin.nrows();
    let mut lambda = DVector::zeros(meq + mineq);
    lambda.rows_mut(0, meq).copy_from(&sol.eq_multipliers);
    lambda
        .rows_mut(meq, mineq)
        .copy_from(&sol.ineq_multipliers.rows(0, mineq));
    lambda
}
