use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::history::RecordValues;
use crate::problem::CallCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIterReached,
    LineSearchFailed,
    QpUnsolvable,
    EvaluationError,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIterReached => "MaxIterReached",
            Status::LineSearchFailed => "LineSearchFailed",
            Status::QpUnsolvable => "QpUnsolvable",
            Status::EvaluationError => "EvaluationError",
        }
    }

    /// Integer code: 0 for success, positive for the failure kinds.
    pub fn code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::MaxIterReached => 1,
            Status::LineSearchFailed => 2,
            Status::QpUnsolvable => 3,
            Status::EvaluationError => 4,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State at the start of one major iteration, after its QP was solved.
/// Vectors are unscaled; the measures are given in both spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub majiter: usize,
    pub x: DVector<f64>,
    pub f: f64,
    pub c: DVector<f64>,
    pub g: DVector<f64>,
    pub jac: DMatrix<f64>,
    pub lambda: DVector<f64>,
    /// Scaled optimality, the value tested against `acc`.
    pub optimality: f64,
    /// Scaled feasibility, the value tested against `acc`.
    pub feasibility: f64,
    pub optimality_unscaled: f64,
    pub feasibility_unscaled: f64,
    /// Line-search step that produced `x`; `None` at iteration 0.
    pub alpha: Option<f64>,
    pub nfev: usize,
    pub ngev: usize,
}

fn rows(jac: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..jac.nrows())
        .map(|i| jac.row(i).iter().copied().collect())
        .collect()
}

impl IterateState {
    /// Every field in save-file form.
    pub fn to_record(&self) -> RecordValues {
        RecordValues {
            majiter: Some(self.majiter),
            x: Some(self.x.as_slice().to_vec()),
            objective: Some(self.f),
            constraints: Some(self.c.as_slice().to_vec()),
            gradient: Some(self.g.as_slice().to_vec()),
            jacobian: Some(rows(&self.jac)),
            optimality: Some(self.optimality_unscaled),
            optimality_scaled: Some(self.optimality),
            feasibility: Some(self.feasibility_unscaled),
            feasibility_scaled: Some(self.feasibility),
            multipliers: Some(self.lambda.as_slice().to_vec()),
            step: self.alpha,
            nfev: Some(self.nfev),
            ngev: Some(self.ngev),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Results {
    pub x: DVector<f64>,
    pub f: f64,
    pub c: DVector<f64>,
    /// Multipliers with the convention `grad f = sum lambda_i grad c_i`;
    /// inequality multipliers are nonnegative.
    pub lambda: DVector<f64>,
    /// Last QP direction, unscaled.
    pub direction: DVector<f64>,
    pub optimality: f64,
    pub feasibility: f64,
    pub optimality_unscaled: f64,
    pub feasibility_unscaled: f64,
    pub num_majiter: usize,
    /// Objective values consumed: live objective calls, finite-difference
    /// probes included, plus evaluations served from a hot-start history.
    pub nfev: usize,
    /// Derivative evaluations consumed, live or replayed.
    pub ngev: usize,
    /// Live user callable invocations during this run.
    pub calls: CallCounts,
    /// Function evaluations served by hot-start replay.
    pub replayed_evals: usize,
    /// Derivative evaluations served by hot-start replay.
    pub replayed_derivs: usize,
    pub status: Status,
    pub message: String,
    /// Non-fatal problems, e.g. a failed plot render.
    pub warnings: Vec<String>,
    pub iterates: Vec<IterateState>,
}

impl Results {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Flat key/value view for scripting front ends.
    pub fn to_map(&self) -> Map<String, Value> {
        let v = json!({
            "x": self.x.as_slice(),
            "objective": self.f,
            "constraints": self.c.as_slice(),
            "multipliers": self.lambda.as_slice(),
            "optimality": self.optimality,
            "feasibility": self.feasibility,
            "num_majiter": self.num_majiter,
            "nfev": self.nfev,
            "ngev": self.ngev,
            "status": self.status.as_str(),
            "message": self.message,
        });
        match v {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }
}
