use nalgebra::{DMatrix, DVector};

use super::nnls::nnls;
use crate::error::LsqError;

#[derive(Debug, Clone, PartialEq)]
pub struct LdpSolution {
    pub x: DVector<f64>,
    /// Multipliers of `Gx >= h` for the objective `1/2 |x|^2`; `x = G' lambda`.
    pub multipliers: DVector<f64>,
}

/// Least-distance programming: `min |x|` subject to `Gx >= h`.
///
/// Solves the NNLS problem `min |[G'; h'] u - e_{q+1}|`, `u >= 0`. A zero
/// residual certifies that the constraints are incompatible.
pub fn ldp(g: &DMatrix<f64>, h: &DVector<f64>) -> Result<LdpSolution, LsqError> {
    let (r, q) = g.shape();
    if h.len() != r {
        return Err(LsqError::Dimension);
    }
    if r == 0 {
        return Ok(LdpSolution {
            x: DVector::zeros(q),
            multipliers: DVector::zeros(0),
        });
    }
    if h.iter().all(|&v| v <= 0.0) {
        return Ok(LdpSolution {
            x: DVector::zeros(q),
            multipliers: DVector::zeros(r),
        });
    }
    if q == 0 {
        return Err(LsqError::Infeasible);
    }

    let mut e = DMatrix::zeros(q + 1, r);
    for i in 0..r {
        for j in 0..q {
            e[(j, i)] = g[(i, j)];
        }
        e[(q, i)] = h[i];
    }
    let mut f = DVector::zeros(q + 1);
    f[q] = 1.0;

    let sol = nnls(&e, &f)?;
    let u = sol.x;
    // at the NNLS optimum |residual|^2 = 1 - h'u
    let fac = 1.0 - h.dot(&u);
    let noise = 100.0 * f64::EPSILON * (1.0 + e.norm() * u.norm());
    if !(fac > 0.0) || sol.rnorm <= noise {
        return Err(LsqError::Infeasible);
    }
    Ok(LdpSolution {
        x: g.tr_mul(&u) / fac,
        multipliers: u / fac,
    })
}
