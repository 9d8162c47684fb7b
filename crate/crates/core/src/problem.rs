//! Problem definition and the counted evaluation boundary around user code.
//!
//! The solver addresses
//!
//! ```text
//! minimize   f(x)
//! subject to c_i(x) = 0,   i = 1..meq
//!            c_i(x) >= 0,  i = meq+1..m
//!            l <= x <= u
//! ```
//!
//! Every call into a user callable goes through [`ValidatedProblem`], which
//! keeps exact per-callable counters.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_diff::{fd_gradient, fd_jacobian, FdOptions};

pub type ObjectiveFn = Box<dyn FnMut(&[f64]) -> f64 + Send>;
pub type VectorFn = Box<dyn FnMut(&[f64]) -> Vec<f64> + Send>;
pub type MatrixFn = Box<dyn FnMut(&[f64]) -> DMatrix<f64> + Send>;

/// An unvalidated nonlinear program.
pub struct ProblemSpec {
    x0: Vec<f64>,
    m: usize,
    meq: usize,
    obj: ObjectiveFn,
    con: Option<VectorFn>,
    grad: Option<VectorFn>,
    jac: Option<MatrixFn>,
    xl: Option<Vec<f64>>,
    xu: Option<Vec<f64>>,
}

impl ProblemSpec {
    pub fn new<F>(x0: Vec<f64>, obj: F) -> Self
    where
        F: FnMut(&[f64]) -> f64 + Send + 'static,
    {
        ProblemSpec {
            x0,
            m: 0,
            meq: 0,
            obj: Box::new(obj),
            con: None,
            grad: None,
            jac: None,
            xl: None,
            xu: None,
        }
    }

    /// `m` constraints of which the first `meq` are equalities.
    pub fn constraints<F>(mut self, m: usize, meq: usize, con: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64> + Send + 'static,
    {
        self.m = m;
        self.meq = meq;
        self.con = Some(Box::new(con));
        self
    }

    pub fn gradient<F>(mut self, grad: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64> + Send + 'static,
    {
        self.grad = Some(Box::new(grad));
        self
    }

    pub fn jacobian<F>(mut self, jac: F) -> Self
    where
        F: FnMut(&[f64]) -> DMatrix<f64> + Send + 'static,
    {
        self.jac = Some(Box::new(jac));
        self
    }

    pub fn bounds(mut self, xl: Vec<f64>, xu: Vec<f64>) -> Self {
        self.xl = Some(xl);
        self.xu = Some(xu);
        self
    }

    pub fn lower_bounds(mut self, xl: Vec<f64>) -> Self {
        self.xl = Some(xl);
        self
    }

    pub fn upper_bounds(mut self, xu: Vec<f64>) -> Self {
        self.xu = Some(xu);
        self
    }

    pub fn validate(self) -> Result<ValidatedProblem> {
        validate_problem(self)
    }
}

/// Exact counts of user-callable invocations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts {
    pub objective: usize,
    pub constraints: usize,
    pub gradient: usize,
    pub jacobian: usize,
}

impl CallCounts {
    pub fn total(&self) -> usize {
        self.objective + self.constraints + self.gradient + self.jacobian
    }
}

/// Objective and constraint values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub c: DVector<f64>,
    /// Objective calls consumed producing this evaluation.
    pub nfev_delta: usize,
}

/// Objective gradient and constraint Jacobian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeEval {
    pub g: DVector<f64>,
    pub jac: DMatrix<f64>,
    /// Derivative evaluations consumed (always 1 for a fresh evaluation).
    pub ngev_delta: usize,
    /// Objective calls made by finite-difference probes.
    pub nfev_delta: usize,
    pub grad_exact: bool,
    pub jac_exact: bool,
}

/// A checked problem instance that owns the user callables.
pub struct ValidatedProblem {
    n: usize,
    m: usize,
    meq: usize,
    x0: DVector<f64>,
    xl: DVector<f64>,
    xu: DVector<f64>,
    obj: ObjectiveFn,
    con: Option<VectorFn>,
    grad: Option<VectorFn>,
    jac: Option<MatrixFn>,
    calls: CallCounts,
    nfev: usize,
    ngev: usize,
}

/// Checks dimensions, bounds and the initial guess, clipping `x0` into the
/// box. User callables are not invoked here; output shapes are checked on
/// every evaluation instead.
pub fn validate_problem(spec: ProblemSpec) -> Result<ValidatedProblem> {
    let n = spec.x0.len();
    if n == 0 {
        return Err(Error::InvalidProblem(
            "problem needs at least one variable".into(),
        ));
    }
    if spec.meq > spec.m {
        return Err(Error::InvalidProblem(format!(
            "meq = {} exceeds the number of constraints m = {}",
            spec.meq, spec.m
        )));
    }
    if spec.m > 0 && spec.con.is_none() {
        return Err(Error::InvalidProblem(
            "constraint function missing for m > 0".into(),
        ));
    }
    if let Some(index) = spec.x0.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInitialGuess { index });
    }
    let xl = bound_vector(spec.xl, n, f64::NEG_INFINITY, "lower bounds")?;
    let xu = bound_vector(spec.xu, n, f64::INFINITY, "upper bounds")?;
    for i in 0..n {
        if xl[i].is_nan() || xu[i].is_nan() || xl[i] > xu[i] {
            return Err(Error::InvalidBounds {
                index: i,
                lower: xl[i],
                upper: xu[i],
            });
        }
    }
    let x0 = DVector::from_iterator(
        n,
        spec.x0
            .iter()
            .enumerate()
            .map(|(i, &v)| v.clamp(xl[i], xu[i])),
    );
    Ok(ValidatedProblem {
        n,
        m: spec.m,
        meq: spec.meq,
        x0,
        xl,
        xu,
        obj: spec.obj,
        con: spec.con,
        grad: spec.grad,
        jac: spec.jac,
        calls: CallCounts::default(),
        nfev: 0,
        ngev: 0,
    })
}

fn bound_vector(
    v: Option<Vec<f64>>,
    n: usize,
    fill: f64,
    what: &'static str,
) -> Result<DVector<f64>> {
    match v {
        None => Ok(DVector::from_element(n, fill)),
        Some(v) if v.len() == n => Ok(DVector::from_vec(v)),
        Some(v) => Err(Error::DimensionMismatch {
            what,
            expected: n,
            got: v.len(),
        }),
    }
}

impl ValidatedProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn meq(&self) -> usize {
        self.meq
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.xl
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.xu
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn has_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// Replaces the initial guess (clipped into the bounds).
    pub fn set_x0(&mut self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "initial guess",
                expected: self.n,
                got: x0.len(),
            });
        }
        if let Some(index) = x0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInitialGuess { index });
        }
        for i in 0..self.n {
            self.x0[i] = x0[i].clamp(self.xl[i], self.xu[i]);
        }
        Ok(())
    }

    pub fn calls(&self) -> CallCounts {
        self.calls
    }

    /// Objective evaluations so far, finite-difference probes included.
    pub fn nfev(&self) -> usize {
        self.nfev
    }

    /// Derivative evaluations so far.
    pub fn ngev(&self) -> usize {
        self.ngev
    }

    pub fn reset_counters(&mut self) {
        self.calls = CallCounts::default();
        self.nfev = 0;
        self.ngev = 0;
    }

    /// Returns the callables wrapped in a fresh spec (bounds and the clipped
    /// `x0` included), so the problem can be validated again.
    pub fn into_spec(self) -> ProblemSpec {
        ProblemSpec {
            x0: self.x0.as_slice().to_vec(),
            m: self.m,
            meq: self.meq,
            obj: self.obj,
            con: self.con,
            grad: self.grad,
            jac: self.jac,
            xl: Some(self.xl.as_slice().to_vec()),
            xu: Some(self.xu.as_slice().to_vec()),
        }
    }

    fn check_x(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "variable vector",
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn call_objective(&mut self, x: &[f64]) -> Result<f64> {
        self.calls.objective += 1;
        self.nfev += 1;
        let f = (self.obj)(x);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NonFiniteFunctionValue { what: "objective" })
        }
    }

    fn call_constraints(&mut self, x: &[f64]) -> Result<DVector<f64>> {
        let Some(con) = self.con.as_mut() else {
            return Ok(DVector::zeros(0));
        };
        self.calls.constraints += 1;
        let c = con(x);
        if c.len() != self.m {
            return Err(Error::DimensionMismatch {
                what: "constraint values",
                expected: self.m,
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFunctionValue {
                what: "constraints",
            });
        }
        Ok(DVector::from_vec(c))
    }

    /// Objective and constraint values at `x`.
    pub fn evaluate(&mut self, x: &DVector<f64>) -> Result<Evaluation> {
        self.check_x(x)?;
        let f = self.call_objective(x.as_slice())?;
        let c = self.call_constraints(x.as_slice())?;
        Ok(Evaluation {
            f,
            c,
            nfev_delta: 1,
        })
    }

    /// Gradient and Jacobian at `x`, using user derivatives where available
    /// and forward differences otherwise. `base` supplies `f(x), c(x)` so the
    /// finite-difference path needs only `n` probes per block.
    pub fn evaluate_derivatives(
        &mut self,
        x: &DVector<f64>,
        fd: &FdOptions,
        base: Option<&Evaluation>,
    ) -> Result<DerivativeEval> {
        self.check_x(x)?;
        let (n, m) = (self.n, self.m);
        let nfev_before = self.nfev;
        self.ngev += 1;

        let g = match self.grad.as_mut() {
            Some(grad) => {
                self.calls.gradient += 1;
                let g = grad(x.as_slice());
                if g.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "gradient",
                        expected: n,
                        got: g.len(),
                    });
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteFunctionValue { what: "gradient" });
                }
                DVector::from_vec(g)
            }
            None => {
                let f0 = base.map(|b| b.f);
                fd_gradient(|p| self.call_objective(p), x, f0, fd)?
            }
        };
        let grad_exact = self.grad.is_some();

        let jac = if m == 0 {
            DMatrix::zeros(0, n)
        } else if let Some(jacf) = self.jac.as_mut() {
            self.calls.jacobian += 1;
            let jac = jacf(x.as_slice());
            if jac.shape() != (m, n) {
                return Err(Error::DimensionMismatch {
                    what: "jacobian rows x cols",
                    expected: m * n,
                    got: jac.nrows() * jac.ncols(),
                });
            }
            if jac.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFunctionValue { what: "jacobian" });
            }
            jac
        } else {
            let c0 = base.map(|b| &b.c);
            fd_jacobian(|p| self.call_constraints(p), x, c0, m, fd)?
        };
        let jac_exact = self.jac.is_some() || m == 0;

        Ok(DerivativeEval {
            g,
            jac,
            ngev_delta: 1,
            nfev_delta: self.nfev - nfev_before,
            grad_exact,
            jac_exact,
        })
    }
}

impl std::fmt::Debug for ValidatedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValidatedProblem")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("meq", &self.meq)
            .field("x0", &self.x0.as_slice())
            .field("calls", &self.calls)
            .finish()
    }
}
