use nalgebra::{DMatrix, DVector};

use crate::error::LsqError;
use crate::linalg::{solve_upper, Householder, RANK_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `|Ax - b|`.
    pub rnorm: f64,
    /// `A'(b - Ax)`: nonpositive off the passive set, ~0 on it.
    pub dual: DVector<f64>,
}

/// Nonnegative least squares by the Lawson-Hanson active-set method.
///
/// A candidate column enters the passive set only if it is numerically
/// independent of the current passive columns and its least-squares
/// coefficient is positive. The inner loop is limited to `3q` iterations.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<NnlsSolution, LsqError> {
    let (p, q) = a.shape();
    if p == 0 || q == 0 || b.len() != p {
        return Err(LsqError::Dimension);
    }
    let max_iter = 3 * q;
    let wtol = 16.0 * f64::EPSILON * a.norm() * b.norm();

    let mut x = DVector::<f64>::zeros(q);
    let mut passive: Vec<usize> = Vec::new();
    let mut iterations = 0;

    loop {
        if passive.len() >= q.min(p) {
            break;
        }
        let w = a.tr_mul(&(b - a * &x));
        let mut rejected = vec![false; q];
        for &j in &passive {
            rejected[j] = true;
        }

        // pick the best admissible column, skipping dependent or
        // non-improving candidates
        let mut entered = None;
        loop {
            let best = (0..q)
                .filter(|&j| !rejected[j] && w[j] > wtol)
                .max_by(|&i, &j| w[i].total_cmp(&w[j]));
            let Some(j) = best else { break };
            let mut trial = passive.clone();
            trial.push(j);
            match subset_lsq(a, b, &trial, Some(j)) {
                Some(z) if z[trial.len() - 1] > 0.0 => {
                    entered = Some((trial, z));
                    break;
                }
                _ => rejected[j] = true,
            }
        }
        let Some((trial, mut z)) = entered else { break };
        passive = trial;

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(LsqError::IterationLimit);
            }
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in passive.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            // move toward z until the first passive coefficient hits zero
            let mut alpha = f64::INFINITY;
            let mut blocking = 0;
            for (k, &j) in passive.iter().enumerate() {
                if z[k] <= 0.0 {
                    let t = x[j] / (x[j] - z[k]);
                    if t < alpha {
                        alpha = t;
                        blocking = k;
                    }
                }
            }
            for (k, &j) in passive.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            x[passive[blocking]] = 0.0;
            passive.retain(|&j| x[j] > 0.0);
            for j in 0..q {
                if !passive.contains(&j) {
                    x[j] = 0.0;
                }
            }
            if passive.is_empty() {
                break;
            }
            z = subset_lsq(a, b, &passive, None).ok_or(LsqError::RankDeficient)?;
        }
    }

    let resid = b - a * &x;
    Ok(NnlsSolution {
        rnorm: resid.norm(),
        dual: a.tr_mul(&resid),
        x,
    })
}

/// Unconstrained least squares on the listed columns. With `check` set, the
/// named (last) column must be independent of the others.
fn subset_lsq(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    cols: &[usize],
    check: Option<usize>,
) -> Option<DVector<f64>> {
    let k = cols.len();
    let sub = DMatrix::from_fn(a.nrows(), k, |i, c| a[(i, cols[c])]);
    let qr = Householder::new(sub);
    if let Some(j) = check {
        let pivot = qr.r()[(k - 1, k - 1)].abs();
        if pivot <= RANK_TOL * a.column(j).norm().max(f64::MIN_POSITIVE) {
            return None;
        }
    }
    let mut qtb = b.clone();
    qr.apply_qt(&mut qtb);
    let r = qr.r().view((0, 0), (k, k)).into_owned();
    if (0..k).any(|i| r[(i, i)] == 0.0) {
        return None;
    }
    Some(solve_upper(&r, &qtb.rows(0, k).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_orthant() {
        let s = nnls(
            &DMatrix::identity(2, 2),
            &DVector::from_vec(vec![1.0, -1.0]),
        )
        .unwrap();
        assert_eq!(s.x.as_slice(), &[1.0, 0.0]);
        assert!((s.rnorm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interior_solution() {
        let s = nnls(&DMatrix::identity(2, 2), &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-15 && (s.x[1] - 2.0).abs() < 1e-15);
        assert!(s.rnorm < 1e-15);
    }

    #[test]
    fn deletion_path() {
        // unconstrained optimum [2, -1]; constrained optimum at the origin
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        let s = nnls(&a, &b).unwrap();
        assert!(s.x.amax() < 1e-12);
        assert!((s.rnorm - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dependent_columns_do_not_break_the_solve() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 3.0, 1.0]);
        let s = nnls(&a, &b).unwrap();
        assert!(s.x.iter().all(|&v| v >= 0.0));
        assert!(s.rnorm < 1e-12);
    }

    #[test]
    fn wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, -1.0, 2.0]);
        let s = nnls(&a, &DVector::from_vec(vec![4.0])).unwrap();
        assert!(s.rnorm < 1e-12);
        assert!(s.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(
            nnls(&DMatrix::zeros(0, 2), &DVector::zeros(0)),
            Err(LsqError::Dimension)
        );
    }
}
