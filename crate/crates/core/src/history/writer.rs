use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{HeaderRecord, HistoryRecord, Line, SaveConfig, SaveIter};
use crate::error::{io, Result};

pub(super) fn encode_line(line: &Line) -> String {
    serde_json::to_string(line).expect("history records always serialize")
}

pub(super) fn encode_record(rec: &HistoryRecord) -> String {
    match rec {
        HistoryRecord::Major(v) => encode_line(&Line::Major(v.clone())),
        HistoryRecord::Eval(v) => encode_line(&Line::Eval(v.clone())),
    }
}

/// Append-only writer for a save file. Every line is flushed as soon as it
/// is written so concurrent readers see each completed record.
#[derive(Debug)]
pub struct HistoryWriter {
    path: PathBuf,
    out: BufWriter<File>,
    cfg: SaveConfig,
    majors: usize,
    lines: usize,
}

/// Creates (or truncates) the save file and writes the header line.
pub fn open_writer(cfg: &SaveConfig, header: &HeaderRecord) -> Result<HistoryWriter> {
    cfg.validate()?;
    let file = File::create(&cfg.path).map_err(|e| io(&cfg.path, e))?;
    let mut w = HistoryWriter {
        path: cfg.path.clone(),
        out: BufWriter::new(file),
        cfg: cfg.clone(),
        majors: 0,
        lines: 0,
    };
    let mut header = header.clone();
    header.save_itr = cfg.save_itr;
    header.save_vars = cfg.save_vars.clone();
    w.write_line(&encode_line(&Line::Header(header)))?;
    Ok(w)
}

impl HistoryWriter {
    /// Writes `rec` restricted to the configured variables. Evaluation
    /// records are dropped unless the writer saves every iteration. Returns
    /// whether a line was written.
    pub fn append_record(&mut self, rec: &HistoryRecord) -> Result<bool> {
        let line = match rec {
            HistoryRecord::Major(v) => {
                self.majors += 1;
                Line::Major(v.masked(&self.cfg.save_vars))
            }
            HistoryRecord::Eval(v) => {
                if self.cfg.save_itr != SaveIter::All {
                    return Ok(false);
                }
                Line::Eval(v.clone())
            }
        };
        self.write_line(&encode_line(&line))?;
        Ok(true)
    }

    fn write_line(&mut self, s: &str) -> Result<()> {
        let path = self.path.clone();
        self.out
            .write_all(s.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .and_then(|_| self.out.flush())
            .map_err(|e| io(&path, e))?;
        self.lines += 1;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn major_count(&self) -> usize {
        self.majors
    }

    /// Lines written so far, header included.
    pub fn line_count(&self) -> usize {
        self.lines
    }
}
