use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::history::History;

/// Fails unless the history was written for a problem of the same shape.
pub fn check_history_shape(history: &History, n: usize, m: usize, meq: usize) -> Result<()> {
    let h = &history.header;
    if (h.n, h.m, h.meq) != (n, m, meq) {
        return Err(Error::HistoryMismatch(format!(
            "history has n={}, m={}, meq={}; problem has n={n}, m={m}, meq={meq}",
            h.n, h.m, h.meq
        )));
    }
    Ok(())
}

/// Initial point for a warm start: `x` of the last major record, or of the
/// last record of any kind if no major record carries `x`.
pub fn apply_warm_start(history: &History) -> Result<Vec<f64>> {
    let from_major = history.majors().filter_map(|r| r.x.clone()).last();
    let x = from_major
        .or_else(|| {
            history
                .records
                .iter()
                .rev()
                .find_map(|r| r.values().x.clone())
        })
        .ok_or(Error::MissingHistory)?;
    if x.len() != history.header.n {
        return Err(Error::HistoryMismatch(format!(
            "stored x has length {}, header says n={}",
            x.len(),
            history.header.n
        )));
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayedEval {
    pub f: f64,
    pub c: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayedDerivs {
    pub g: DVector<f64>,
    pub jac: DMatrix<f64>,
}

/// Serves stored values strictly in recorded call order. Function values
/// come from evaluation records, derivatives from major records. Each stream
/// runs dry independently, after which the driver calls the user code.
#[derive(Debug, Clone, Default)]
pub struct Replayer {
    evals: VecDeque<ReplayedEval>,
    derivs: VecDeque<ReplayedDerivs>,
    served_evals: usize,
    served_derivs: usize,
}

pub fn build_hot_start_replayer(
    history: &History,
    n: usize,
    m: usize,
    meq: usize,
) -> Result<Replayer> {
    check_history_shape(history, n, m, meq)?;
    let mut evals = VecDeque::new();
    for r in history.evals() {
        let (Some(f), Some(c)) = (r.objective, r.constraints.as_ref()) else {
            break;
        };
        if c.len() != m {
            return Err(Error::HistoryMismatch(format!(
                "stored constraints have length {}, expected {m}",
                c.len()
            )));
        }
        evals.push_back(ReplayedEval {
            f,
            c: DVector::from_column_slice(c),
        });
    }
    let mut derivs = VecDeque::new();
    for r in history.majors() {
        let Some(g) = r.gradient.as_ref() else { break };
        let jac = match (&r.jacobian, m) {
            (_, 0) => DMatrix::zeros(0, n),
            (Some(rows), _) => {
                if rows.len() != m || rows.iter().any(|row| row.len() != n) {
                    return Err(Error::HistoryMismatch(
                        "stored jacobian has the wrong shape".into(),
                    ));
                }
                DMatrix::from_fn(m, n, |i, j| rows[i][j])
            }
            (None, _) => break,
        };
        if g.len() != n {
            return Err(Error::HistoryMismatch(format!(
                "stored gradient has length {}, expected {n}",
                g.len()
            )));
        }
        derivs.push_back(ReplayedDerivs {
            g: DVector::from_column_slice(g),
            jac,
        });
    }
    Ok(Replayer {
        evals,
        derivs,
        served_evals: 0,
        served_derivs: 0,
    })
}

impl Replayer {
    pub fn next_eval(&mut self) -> Option<ReplayedEval> {
        let e = self.evals.pop_front()?;
        self.served_evals += 1;
        Some(e)
    }

    pub fn next_derivs(&mut self) -> Option<ReplayedDerivs> {
        let d = self.derivs.pop_front()?;
        self.served_derivs += 1;
        Some(d)
    }

    pub fn served_evals(&self) -> usize {
        self.served_evals
    }

    pub fn served_derivs(&self) -> usize {
        self.served_derivs
    }

    pub fn remaining(&self) -> (usize, usize) {
        (self.evals.len(), self.derivs.len())
    }

    pub fn is_exhausted(&self) -> bool {
        self.evals.is_empty() && self.derivs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{HeaderRecord, HistoryRecord, RecordValues, SaveConfig, SaveIter};

    fn history(xs: &[[f64; 2]]) -> History {
        let cfg = SaveConfig::all_vars("unused", SaveIter::Major);
        let mut h = History::new(HeaderRecord::new(2, 2, 1, &cfg, serde_json::Value::Null));
        for (k, x) in xs.iter().enumerate() {
            h.records.push(HistoryRecord::Major(RecordValues {
                majiter: Some(k),
                x: Some(x.to_vec()),
                ..Default::default()
            }));
        }
        h
    }

    #[test]
    fn warm_start_takes_last_x() {
        assert_eq!(
            apply_warm_start(&history(&[[2.0, 0.6], [0.5, 0.5]])).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            apply_warm_start(&history(&[[1.0, 2.0]])).unwrap(),
            vec![1.0, 2.0]
        );
        assert!(matches!(
            apply_warm_start(&history(&[])),
            Err(Error::MissingHistory)
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let h = history(&[[1.0, 2.0]]);
        assert!(matches!(
            build_hot_start_replayer(&h, 3, 2, 1),
            Err(Error::HistoryMismatch(_))
        ));
        assert!(matches!(
            build_hot_start_replayer(&h, 2, 1, 1),
            Err(Error::HistoryMismatch(_))
        ));
    }

    #[test]
    fn empty_history_replays_nothing() {
        let mut r = build_hot_start_replayer(&history(&[]), 2, 2, 1).unwrap();
        assert!(r.is_exhausted());
        assert!(r.next_eval().is_none());
        assert!(r.next_derivs().is_none());
    }
}
