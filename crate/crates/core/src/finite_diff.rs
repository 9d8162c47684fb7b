//! Forward-difference approximations of the objective gradient and the
//! constraint Jacobian.
//!
//! Probe points are `x + h_i e_i` and are not clipped to the variable bounds,
//! so user functions must tolerate being evaluated slightly outside them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size configuration for forward differences.
///
/// `h_abs` takes precedence over `h_rel` when both are set. A relative step
/// resolves to `h_rel * max(1, |x_i|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    pub h_abs: Option<f64>,
    pub h_rel: Option<f64>,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            h_abs: None,
            h_rel: Some(f64::EPSILON.sqrt()),
        }
    }
}

impl FdOptions {
    pub fn absolute(h: f64) -> Self {
        FdOptions {
            h_abs: Some(h),
            h_rel: None,
        }
    }

    pub fn relative(h: f64) -> Self {
        FdOptions {
            h_abs: None,
            h_rel: Some(h),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, h) in [("h_abs", self.h_abs), ("h_rel", self.h_rel)] {
            if let Some(h) = h {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::InvalidFdOptions(format!(
                        "{name} must be finite and positive, got {h}"
                    )));
                }
            }
        }
        if self.h_abs.is_none() && self.h_rel.is_none() {
            return Err(Error::InvalidFdOptions(
                "one of h_abs or h_rel must be set".into(),
            ));
        }
        Ok(())
    }

    /// Step used for coordinate `xi`.
    pub fn step(&self, xi: f64) -> Result<f64> {
        match (self.h_abs, self.h_rel) {
            (Some(h), _) => Ok(h),
            (None, Some(r)) => Ok(r * xi.abs().max(1.0)),
            (None, None) => Err(Error::InvalidFdOptions(
                "one of h_abs or h_rel must be set".into(),
            )),
        }
    }
}

/// Forward-difference gradient of a scalar function.
///
/// `f0` is `fun(x)` when already known; otherwise it is evaluated here, costing
/// one extra call. Every probe is checked for finiteness.
pub fn fd_gradient<F>(
    mut fun: F,
    x: &DVector<f64>,
    f0: Option<f64>,
    opts: &FdOptions,
) -> Result<DVector<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    opts.validate()?;
    let f0 = match f0 {
        Some(v) => v,
        None => finite_scalar(fun(x.as_slice())?)?,
    };
    let mut probe = x.clone();
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = opts.step(x[i])?;
        probe[i] = x[i] + h;
        let fi = finite_scalar(fun(probe.as_slice())?)?;
        probe[i] = x[i];
        g[i] = (fi - f0) / h;
    }
    Ok(g)
}

/// Forward-difference Jacobian (`m x n`) of a vector function.
///
/// With `m == 0` no probes are made and an empty `0 x n` matrix is returned.
pub fn fd_jacobian<F>(
    mut con: F,
    x: &DVector<f64>,
    c0: Option<&DVector<f64>>,
    m: usize,
    opts: &FdOptions,
) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<DVector<f64>>,
{
    let n = x.len();
    if m == 0 {
        return Ok(DMatrix::zeros(0, n));
    }
    opts.validate()?;
    let base;
    let c0 = match c0 {
        Some(c) => c,
        None => {
            base = finite_vector(con(x.as_slice())?, m)?;
            &base
        }
    };
    if c0.len() != m {
        return Err(Error::DimensionMismatch {
            what: "constraint values",
            expected: m,
            got: c0.len(),
        });
    }
    let mut probe = x.clone();
    let mut jac = DMatrix::zeros(m, n);
    for j in 0..n {
        let h = opts.step(x[j])?;
        probe[j] = x[j] + h;
        let cj = finite_vector(con(probe.as_slice())?, m)?;
        probe[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (cj[i] - c0[i]) / h;
        }
    }
    Ok(jac)
}

fn finite_scalar(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteFunctionValue {
            what: "objective (finite-difference probe)",
        })
    }
}

fn finite_vector(v: DVector<f64>, m: usize) -> Result<DVector<f64>> {
    if v.len() != m {
        return Err(Error::DimensionMismatch {
            what: "constraint values",
            expected: m,
            got: v.len(),
        });
    }
    if v.iter().all(|c| c.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFiniteFunctionValue {
            what: "constraints (finite-difference probe)",
        })
    }
}
