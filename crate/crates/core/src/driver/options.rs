use std::path::PathBuf;

use serde_json::json;

use crate::error::{Error, Result};
use crate::finite_diff::FdOptions;
use crate::history::SaveConfig;
use crate::scaling::ScaleSpec;
use crate::viz::VizConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Convergence tolerance on the scaled optimality and feasibility measures.
    pub acc: f64,
    /// Major iteration limit.
    pub maxiter: usize,
    pub fd: FdOptions,
    pub x_scaler: ScaleSpec,
    pub obj_scaler: f64,
    pub con_scaler: ScaleSpec,
    pub save: Option<SaveConfig>,
    pub summary_path: Option<PathBuf>,
    pub visualize: Option<VizConfig>,
    /// Start from the last iterate of this history.
    pub warm_start: Option<PathBuf>,
    /// Replay function and derivative values from this history.
    pub hot_start: Option<PathBuf>,
    /// Echo summary rows and the final message to standard output.
    pub print_summary: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            acc: 1e-6,
            maxiter: 100,
            fd: FdOptions::default(),
            x_scaler: ScaleSpec::Uniform(1.0),
            obj_scaler: 1.0,
            con_scaler: ScaleSpec::Uniform(1.0),
            save: None,
            summary_path: None,
            visualize: None,
            warm_start: None,
            hot_start: None,
            print_summary: false,
        }
    }
}

impl SolverOptions {
    pub fn with_acc(mut self, acc: f64) -> Self {
        self.acc = acc;
        self
    }

    pub fn with_maxiter(mut self, maxiter: usize) -> Self {
        self.maxiter = maxiter;
        self
    }

    pub fn with_fd(mut self, fd: FdOptions) -> Self {
        self.fd = fd;
        self
    }

    pub fn with_scalers(
        mut self,
        x_scaler: impl Into<ScaleSpec>,
        obj_scaler: f64,
        con_scaler: impl Into<ScaleSpec>,
    ) -> Self {
        self.x_scaler = x_scaler.into();
        self.obj_scaler = obj_scaler;
        self.con_scaler = con_scaler.into();
        self
    }

    pub fn with_save(mut self, save: SaveConfig) -> Self {
        self.save = Some(save);
        self
    }

    pub fn with_summary(mut self, path: impl Into<PathBuf>) -> Self {
        self.summary_path = Some(path.into());
        self
    }

    pub fn with_visualize(mut self, viz: VizConfig) -> Self {
        self.visualize = Some(viz);
        self
    }

    pub fn with_warm_start(mut self, path: impl Into<PathBuf>) -> Self {
        self.warm_start = Some(path.into());
        self
    }

    pub fn with_hot_start(mut self, path: impl Into<PathBuf>) -> Self {
        self.hot_start = Some(path.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.acc > 0.0 && self.acc.is_finite()) {
            return Err(Error::InvalidOption(format!(
                "acc must be positive, got {}",
                self.acc
            )));
        }
        if self.maxiter < 1 {
            return Err(Error::InvalidOption("maxiter must be at least 1".into()));
        }
        if self.warm_start.is_some() && self.hot_start.is_some() {
            return Err(Error::InvalidOption(
                "warm_start and hot_start are mutually exclusive".into(),
            ));
        }
        self.fd.validate()?;
        if let Some(save) = &self.save {
            save.validate()?;
        }
        if let Some(viz) = &self.visualize {
            viz.validate_syntax()?;
        }
        Ok(())
    }

    /// The solver settings stored in a save-file header.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "acc": self.acc,
            "maxiter": self.maxiter,
            "fd": self.fd,
            "x_scaler": self.x_scaler,
            "obj_scaler": self.obj_scaler,
            "con_scaler": self.con_scaler,
            "warm_start": self.warm_start,
            "hot_start": self.hot_start,
        })
    }
}
