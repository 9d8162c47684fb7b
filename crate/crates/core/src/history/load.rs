use std::path::Path;

use super::{History, HistoryRecord, Line, FORMAT_VERSION};
use crate::error::{io, Error, Result};

/// Reads a save file. A final line that fails to parse and lacks a trailing
/// newline is taken to be a write in progress: it is dropped and
/// [`History::truncated`] is set. Any other malformed line is a
/// `FormatError`.
pub fn load_history<P: AsRef<Path>>(path: P) -> Result<History> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
    parse_history(&text)
}

pub(crate) fn parse_history(text: &str) -> Result<History> {
    let ends_clean = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let Some(first) = lines.first() else {
        return Err(Error::FormatError {
            line: 1,
            reason: "empty file".into(),
        });
    };
    let header = match serde_json::from_str::<Line>(first) {
        Ok(Line::Header(h)) => h,
        Ok(_) => {
            return Err(Error::FormatError {
                line: 1,
                reason: "first record is not a header".into(),
            })
        }
        Err(e) => {
            return Err(Error::FormatError {
                line: 1,
                reason: e.to_string(),
            })
        }
    };
    if header.version != FORMAT_VERSION {
        return Err(Error::FormatError {
            line: 1,
            reason: format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                header.version
            ),
        });
    }
    let mut history = History::new(header);
    let last = lines.len() - 1;
    let mut prev_majiter: Option<usize> = None;
    for (i, raw) in lines.iter().enumerate().skip(1) {
        if raw.trim().is_empty() {
            continue;
        }
        let rec = match serde_json::from_str::<Line>(raw) {
            Ok(Line::Major(v)) => {
                if let (Some(p), Some(k)) = (prev_majiter, v.majiter) {
                    if k <= p {
                        return Err(Error::FormatError {
                            line: i + 1,
                            reason: format!("majiter {k} does not increase"),
                        });
                    }
                }
                prev_majiter = v.majiter.or(prev_majiter);
                HistoryRecord::Major(v)
            }
            Ok(Line::Eval(v)) => HistoryRecord::Eval(v),
            Ok(Line::Header(_)) => {
                return Err(Error::FormatError {
                    line: i + 1,
                    reason: "repeated header".into(),
                })
            }
            Err(_) if i == last && !ends_clean => {
                log::warn!("dropping torn final line {} of history", i + 1);
                history.truncated = true;
                continue;
            }
            Err(e) => {
                return Err(Error::FormatError {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        };
        history.records.push(rec);
    }
    Ok(history)
}
