//! Constrained linear least squares, each stage reduced to the previous one:
//!
//! * [`nnls`]: `min |Ax - b|` subject to `x >= 0` (Lawson-Hanson active set)
//! * [`ldp`]: `min |x|` subject to `Gx >= h`, through the NNLS dual
//! * [`lsi`]: `min |Ax - b|` subject to `Gx >= h`, through an LDP in the
//!   orthogonally transformed variables
//! * [`lsei`]: adds equalities `Ex = f`, eliminated on the null space of `E`
//! * [`solve_qp`]: the quadratic subproblem `min 1/2 d'Bd + g'd` posed as an
//!   LSEI with `A = L'`, `b = -L^{-1} g`
//!
//! Multipliers follow the convention `A'(Ax - b) = E'mu + G'lambda` with
//! `lambda >= 0`, i.e. they belong to the objective `1/2 |Ax - b|^2`.

mod ldp;
mod lsei;
mod lsi;
mod nnls;
mod qp;

pub use ldp::{ldp, LdpSolution};
pub use lsei::{lsei, LseiSolution};
pub use lsi::{lsi, LsiSolution};
pub use nnls::{nnls, NnlsSolution};
pub use qp::{solve_qp, QpSolution, QpSubproblem};
