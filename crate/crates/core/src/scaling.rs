//! Multiplicative scaling of variables, objective and constraints.
//!
//! Scaled quantities are `raw * scaler`: `x~ = xs . x`, `f~ = os * f`,
//! `c~ = cs . c`. By the chain rule the gradient scales as `(os / xs) . g` and
//! the Jacobian entry `(i, j)` as `cs_i / xs_j`. The solver iterates in scaled
//! space while user callables always see unscaled `x`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar broadcast to every component, or one value per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleSpec {
    Uniform(f64),
    PerComponent(Vec<f64>),
}

impl From<f64> for ScaleSpec {
    fn from(v: f64) -> Self {
        ScaleSpec::Uniform(v)
    }
}

impl From<Vec<f64>> for ScaleSpec {
    fn from(v: Vec<f64>) -> Self {
        ScaleSpec::PerComponent(v)
    }
}

impl From<&[f64]> for ScaleSpec {
    fn from(v: &[f64]) -> Self {
        ScaleSpec::PerComponent(v.to_vec())
    }
}

impl ScaleSpec {
    fn broadcast(&self, len: usize, what: &'static str) -> Result<DVector<f64>> {
        let v = match self {
            ScaleSpec::Uniform(s) => DVector::from_element(len, *s),
            ScaleSpec::PerComponent(v) if v.len() == len => DVector::from_column_slice(v),
            ScaleSpec::PerComponent(v) => {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: len,
                    got: v.len(),
                })
            }
        };
        if let Some(&bad) = v.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::NonPositiveScaler { what, value: bad });
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    xs: DVector<f64>,
    os: f64,
    cs: DVector<f64>,
}

/// Builds a scaler, broadcasting scalar specs to `n` or `m` entries.
pub fn make_scaler(
    x_s: impl Into<ScaleSpec>,
    o_s: f64,
    c_s: impl Into<ScaleSpec>,
    n: usize,
    m: usize,
) -> Result<Scaler> {
    let xs = x_s.into().broadcast(n, "x_scaler")?;
    let cs = c_s.into().broadcast(m, "con_scaler")?;
    if !(o_s.is_finite() && o_s > 0.0) {
        return Err(Error::NonPositiveScaler {
            what: "obj_scaler",
            value: o_s,
        });
    }
    Ok(Scaler { xs, os: o_s, cs })
}

impl Scaler {
    pub fn identity(n: usize, m: usize) -> Self {
        Scaler {
            xs: DVector::from_element(n, 1.0),
            os: 1.0,
            cs: DVector::from_element(m, 1.0),
        }
    }

    pub fn x_scaler(&self) -> &DVector<f64> {
        &self.xs
    }

    pub fn obj_scaler(&self) -> f64 {
        self.os
    }

    pub fn con_scaler(&self) -> &DVector<f64> {
        &self.cs
    }

    pub fn is_identity(&self) -> bool {
        self.os == 1.0 && self.xs.iter().chain(self.cs.iter()).all(|&s| s == 1.0)
    }

    pub fn scale_x(&self, x: &DVector<f64>) -> DVector<f64> {
        x.component_mul(&self.xs)
    }

    pub fn unscale_x(&self, x: &DVector<f64>) -> DVector<f64> {
        x.component_div(&self.xs)
    }

    /// Infinite bounds stay infinite (positive scalers preserve the sign).
    pub fn scale_bounds(
        &self,
        xl: &DVector<f64>,
        xu: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        (self.scale_x(xl), self.scale_x(xu))
    }

    pub fn scale_fc(&self, f: f64, c: &DVector<f64>) -> (f64, DVector<f64>) {
        (f * self.os, c.component_mul(&self.cs))
    }

    pub fn unscale_fc(&self, f: f64, c: &DVector<f64>) -> (f64, DVector<f64>) {
        (f / self.os, c.component_div(&self.cs))
    }

    pub fn scale_derivs(
        &self,
        g: &DVector<f64>,
        jac: &DMatrix<f64>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let g = g.component_div(&self.xs) * self.os;
        let jac = DMatrix::from_fn(jac.nrows(), jac.ncols(), |i, j| {
            jac[(i, j)] * self.cs[i] / self.xs[j]
        });
        (g, jac)
    }

    pub fn unscale_derivs(
        &self,
        g: &DVector<f64>,
        jac: &DMatrix<f64>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let g = g.component_mul(&self.xs) / self.os;
        let jac = DMatrix::from_fn(jac.nrows(), jac.ncols(), |i, j| {
            jac[(i, j)] * self.xs[j] / self.cs[i]
        });
        (g, jac)
    }

    /// Maps scaled-space multipliers back to the unscaled Lagrangian
    /// `grad f = sum lambda_i grad c_i`: `lambda_i = lambda~_i * cs_i / os`.
    pub fn unscale_multipliers(&self, lambda: &DVector<f64>) -> DVector<f64> {
        lambda.component_mul(&self.cs) / self.os
    }

    /// Maps a scaled step back to unscaled units.
    pub fn unscale_step(&self, d: &DVector<f64>) -> DVector<f64> {
        self.unscale_x(d)
    }
}
