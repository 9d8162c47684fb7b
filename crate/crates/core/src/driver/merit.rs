//! Convergence measures, the L1 exact-penalty merit function and the
//! backtracking line search on it.

use nalgebra::DVector;

use crate::error::{Error, Result};

pub const ARMIJO: f64 = 1e-4;
pub const CONTRACTION: f64 = 0.5;
pub const MIN_CONTRACTION: f64 = 0.1;
pub const MIN_STEP: f64 = 1e-10;

/// `|c_i|` for equalities, `max(0, -c_i)` for inequalities.
pub fn violation(c: f64, i: usize, meq: usize) -> f64 {
    if i < meq {
        c.abs()
    } else {
        (-c).max(0.0)
    }
}

/// Returns `(optimality, feasibility)`:
/// `optimality = |g'd| + sum |lambda_i| viol_i` and
/// `feasibility = max_i viol_i` (0 when there are no constraints).
pub fn convergence_measures(
    g: &DVector<f64>,
    d: &DVector<f64>,
    c: &DVector<f64>,
    lambda: &DVector<f64>,
    meq: usize,
) -> (f64, f64) {
    let mut optimality = g.dot(d).abs();
    let mut feasibility: f64 = 0.0;
    for (i, &ci) in c.iter().enumerate() {
        let v = violation(ci, i, meq);
        optimality += lambda[i].abs() * v;
        feasibility = feasibility.max(v);
    }
    (optimality, feasibility)
}

/// `phi = f + sum rho_i viol_i`.
pub fn merit_value(f: f64, c: &DVector<f64>, rho: &DVector<f64>, meq: usize) -> f64 {
    f + c
        .iter()
        .enumerate()
        .map(|(i, &ci)| rho[i] * violation(ci, i, meq))
        .sum::<f64>()
}

/// Powell's rule `rho_i' = max(|lambda_i|, (rho_i + |lambda_i|) / 2)`.
pub fn update_penalties(rho: &DVector<f64>, lambda: &DVector<f64>) -> DVector<f64> {
    rho.zip_map(lambda, |r, l| l.abs().max((r + l.abs()) / 2.0))
}

/// Directional derivative bound of the merit function along a QP step:
/// `g'd - (1 - xi) sum rho_i viol_i`, where `xi` is the relaxation value.
pub fn merit_slope(
    g: &DVector<f64>,
    d: &DVector<f64>,
    c: &DVector<f64>,
    rho: &DVector<f64>,
    meq: usize,
    relax_value: f64,
) -> f64 {
    let penalty: f64 = c
        .iter()
        .enumerate()
        .map(|(i, &ci)| rho[i] * violation(ci, i, meq))
        .sum();
    g.dot(d) - (1.0 - relax_value) * penalty
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub x: DVector<f64>,
    pub f: f64,
    pub c: DVector<f64>,
    pub merit: f64,
    pub trials: usize,
}

/// Backtracking Armijo search on the merit function starting from `alpha = 1`.
///
/// After a rejected trial the next step is the minimizer of the parabola
/// through `phi0`, `dphi0` and the trial value, clamped to
/// `[0.1 alpha, 0.5 alpha]`. Trial points are clipped into `[lower, upper]`.
#[allow(clippy::too_many_arguments)]
pub fn line_search<F>(
    mut eval: F,
    x: &DVector<f64>,
    d: &DVector<f64>,
    phi0: f64,
    dphi0: f64,
    rho: &DVector<f64>,
    meq: usize,
    bounds: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<LineSearchResult>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
{
    if !(dphi0 < 0.0) {
        return Err(Error::NotDescent { slope: dphi0 });
    }
    let mut alpha = 1.0;
    let mut trials = 0;
    while alpha >= MIN_STEP {
        let mut xt = x + d * alpha;
        if let Some((lo, hi)) = bounds {
            for i in 0..xt.len() {
                xt[i] = xt[i].clamp(lo[i], hi[i]);
            }
        }
        let (f, c) = eval(&xt)?;
        trials += 1;
        let phi = merit_value(f, &c, rho, meq);
        if phi <= phi0 + ARMIJO * alpha * dphi0 {
            return Ok(LineSearchResult {
                alpha,
                x: xt,
                f,
                c,
                merit: phi,
                trials,
            });
        }
        let curvature = phi - phi0 - dphi0 * alpha;
        let parabolic = if curvature > 0.0 {
            -dphi0 * alpha * alpha / (2.0 * curvature)
        } else {
            CONTRACTION * alpha
        };
        alpha = parabolic.clamp(MIN_CONTRACTION * alpha, CONTRACTION * alpha);
    }
    Err(Error::LineSearchFailed { min_step: MIN_STEP })
}
