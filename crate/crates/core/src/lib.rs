//! Sequential least-squares quadratic programming.
//!
//! Solves smooth nonlinear programs with equality and inequality constraints
//! and variable bounds. Each major iteration solves a quadratic subproblem
//! through a chain of constrained linear least-squares solvers, takes an
//! L1-merit line search step and applies a damped BFGS update.
//!
//! Around the core algorithm the crate provides forward-difference
//! derivatives, independent scaling of variables and functions, a JSON Lines
//! iteration history, a fixed-width summary table, plot emission, and warm or
//! hot restarts from a saved history.
//!
//! ```
//! use slsqp::{optimize, ProblemSpec, SolverOptions, Status};
//!
//! let mut problem = ProblemSpec::new(vec![2.0, 3.0], |x| x[0] * x[0] + x[1] * x[1])
//!     .constraints(1, 1, |x| vec![x[0] + x[1] - 1.0])
//!     .validate()
//!     .unwrap();
//! let res = optimize(&mut problem, &SolverOptions::default()).unwrap();
//! assert_eq!(res.status, Status::Converged);
//! assert!((res.x[0] - 0.5).abs() < 1e-6);
//! ```

pub mod driver;
pub mod error;
pub mod finite_diff;
pub mod history;
mod linalg;
pub mod lsq;
pub mod problem;
pub mod problems;
pub mod scaling;
pub mod viz;

pub use driver::{optimize, optimize_with_observer, Observer, Results, SolverOptions, Status};
pub use error::{Error, LsqError, Result};
pub use finite_diff::FdOptions;
pub use problem::{ProblemSpec, ValidatedProblem};
pub use scaling::{make_scaler, Scaler};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
