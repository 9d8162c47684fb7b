//! Iteration history: a JSON Lines save file, its loader, and the fixed-width
//! summary table.
//!
//! The first line of a save file is a header object; every following line is
//! a major-iteration record or, with [`SaveIter::All`], a function-evaluation
//! record. Values are stored unscaled, except for the `*_scaled` measures.
//! Floats are written in the shortest form that parses back to the same
//! double, so a load of a written file reproduces every value bit for bit.

mod load;
mod summary;
mod writer;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::load_history;
pub use summary::{format_sci, summary_header, summary_row, SummaryWriter, DEFAULT_SUMMARY_PATH};
pub use writer::{open_writer, HistoryWriter};

pub const FORMAT_VERSION: u32 = 1;

/// Names accepted in [`SaveConfig::save_vars`].
pub const SAVE_VARS: [&str; 12] = [
    "majiter",
    "x",
    "objective",
    "constraints",
    "gradient",
    "jacobian",
    "optimality",
    "feasibility",
    "multipliers",
    "step",
    "nfev",
    "ngev",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SaveIter {
    /// One record per major iteration.
    #[default]
    Major,
    /// Major records plus one record per function evaluation.
    All,
}

impl std::str::FromStr for SaveIter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "major" => Ok(SaveIter::Major),
            "all" => Ok(SaveIter::All),
            _ => Err(Error::InvalidOption(format!(
                "save_itr must be 'major' or 'all', got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaveConfig {
    pub path: PathBuf,
    pub save_itr: SaveIter,
    pub save_vars: Vec<String>,
}

impl SaveConfig {
    pub fn new<P, S>(path: P, save_itr: SaveIter, save_vars: &[S]) -> Result<Self>
    where
        P: Into<PathBuf>,
        S: AsRef<str>,
    {
        let cfg = SaveConfig {
            path: path.into(),
            save_itr,
            save_vars: save_vars.iter().map(|s| s.as_ref().to_string()).collect(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Saves every variable.
    pub fn all_vars<P: Into<PathBuf>>(path: P, save_itr: SaveIter) -> Self {
        SaveConfig {
            path: path.into(),
            save_itr,
            save_vars: SAVE_VARS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.save_vars.is_empty() {
            return Err(Error::InvalidOption("save_vars must not be empty".into()));
        }
        for v in &self.save_vars {
            if !SAVE_VARS.contains(&v.as_str()) {
                return Err(Error::InvalidVarName(v.clone()));
            }
        }
        Ok(())
    }

    pub fn saves(&self, var: &str) -> bool {
        self.save_vars.iter().any(|v| v == var)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderRecord {
    pub version: u32,
    pub n: usize,
    pub m: usize,
    pub meq: usize,
    pub save_itr: SaveIter,
    pub save_vars: Vec<String>,
    #[serde(default)]
    pub options: serde_json::Value,
    /// Seconds since the Unix epoch when the file was opened.
    #[serde(default)]
    pub timestamp: f64,
}

impl HeaderRecord {
    pub fn new(
        n: usize,
        m: usize,
        meq: usize,
        cfg: &SaveConfig,
        options: serde_json::Value,
    ) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        HeaderRecord {
            version: FORMAT_VERSION,
            n,
            m,
            meq,
            save_itr: cfg.save_itr,
            save_vars: cfg.save_vars.clone(),
            options,
            timestamp,
        }
    }

    pub fn saves(&self, var: &str) -> bool {
        self.save_vars.iter().any(|v| v == var)
    }
}

/// Values carried by a major or evaluation record. Absent fields were not
/// configured for saving (or do not exist yet, like `step` at iteration 0).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecordValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majiter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<Vec<f64>>,
    /// Row-major, one inner list per constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimality: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimality_scaled: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility_scaled: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nfev: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ngev: Option<usize>,
}

impl RecordValues {
    /// Keeps only the fields named in `vars`. `optimality` and `feasibility`
    /// cover both their unscaled and scaled variants.
    pub fn masked(&self, vars: &[String]) -> RecordValues {
        let has = |name: &str| vars.iter().any(|v| v == name);
        let keep = |on: bool, v: Option<f64>| if on { v } else { None };
        RecordValues {
            majiter: self.majiter.filter(|_| has("majiter")),
            x: self.x.clone().filter(|_| has("x")),
            objective: keep(has("objective"), self.objective),
            constraints: self.constraints.clone().filter(|_| has("constraints")),
            gradient: self.gradient.clone().filter(|_| has("gradient")),
            jacobian: self.jacobian.clone().filter(|_| has("jacobian")),
            optimality: keep(has("optimality"), self.optimality),
            optimality_scaled: keep(has("optimality"), self.optimality_scaled),
            feasibility: keep(has("feasibility"), self.feasibility),
            feasibility_scaled: keep(has("feasibility"), self.feasibility_scaled),
            multipliers: self.multipliers.clone().filter(|_| has("multipliers")),
            step: keep(has("step"), self.step),
            nfev: self.nfev.filter(|_| has("nfev")),
            ngev: self.ngev.filter(|_| has("ngev")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryRecord {
    Major(RecordValues),
    Eval(RecordValues),
}

impl HistoryRecord {
    pub fn values(&self) -> &RecordValues {
        match self {
            HistoryRecord::Major(v) | HistoryRecord::Eval(v) => v,
        }
    }

    pub fn is_major(&self) -> bool {
        matches!(self, HistoryRecord::Major(_))
    }
}

/// On-disk shape of one line.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Header(HeaderRecord),
    Major(RecordValues),
    Eval(RecordValues),
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub header: HeaderRecord,
    pub records: Vec<HistoryRecord>,
    /// Set when a torn final line was dropped during loading.
    pub truncated: bool,
}

impl History {
    pub fn new(header: HeaderRecord) -> Self {
        History {
            header,
            records: Vec::new(),
            truncated: false,
        }
    }

    pub fn majors(&self) -> impl Iterator<Item = &RecordValues> + '_ {
        self.records
            .iter()
            .filter(|r| r.is_major())
            .map(|r| r.values())
    }

    pub fn evals(&self) -> impl Iterator<Item = &RecordValues> + '_ {
        self.records
            .iter()
            .filter(|r| !r.is_major())
            .map(|r| r.values())
    }

    pub fn num_majors(&self) -> usize {
        self.majors().count()
    }

    /// Serializes the header and all records to JSON Lines text.
    pub fn to_jsonl(&self) -> String {
        let mut out = writer::encode_line(&Line::Header(self.header.clone()));
        out.push('\n');
        for r in &self.records {
            out.push_str(&writer::encode_record(r));
            out.push('\n');
        }
        out
    }
}
