use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::driver::IterateState;
use crate::error::{io, Result};

pub const DEFAULT_SUMMARY_PATH: &str = "slsqp_summary.out";

/// C-style scientific notation: `digits` fractional digits and an exponent
/// with a sign and at least two digits, e.g. `5.00000000e-01`.
pub fn format_sci(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.digits$e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

pub fn summary_header() -> String {
    format!(
        "{:>5} {:>7} {:>7} {:>15} {:>15} {:>15} {:>11}",
        "MAJOR", "NFEV", "NGEV", "OBJFUN", "OPTIMALITY", "FEASIBILITY", "STEP"
    )
}

/// One fixed-width row. The step column shows 0 at iteration 0, before any
/// line search has run.
pub fn summary_row(it: &IterateState) -> String {
    format!(
        "{:>5} {:>7} {:>7} {:>15} {:>15} {:>15} {:>11}",
        it.majiter,
        it.nfev,
        it.ngev,
        format_sci(it.f, 8),
        format_sci(it.optimality, 8),
        format_sci(it.feasibility, 8),
        format_sci(it.alpha.unwrap_or(0.0), 4),
    )
}

/// Writes the summary table, flushing after every row.
#[derive(Debug)]
pub struct SummaryWriter {
    path: PathBuf,
    out: BufWriter<File>,
    rows: usize,
}

impl SummaryWriter {
    pub fn create<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| io(&path, e))?;
        Ok(SummaryWriter {
            path,
            out: BufWriter::new(file),
            rows: 0,
        })
    }

    pub fn write_summary_row(&mut self, it: &IterateState) -> Result<()> {
        let mut text = String::new();
        if self.rows == 0 {
            text.push_str(&summary_header());
            text.push('\n');
        }
        text.push_str(&summary_row(it));
        text.push('\n');
        let path = self.path.clone();
        self.out
            .write_all(text.as_bytes())
            .and_then(|_| self.out.flush())
            .map_err(|e| io(&path, e))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
