use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread::JoinHandle;

use super::{render_series, Refresh, VizConfig};
use crate::error::{Error, Result};
use crate::history::{HeaderRecord, History, HistoryRecord};

enum Msg {
    Record(HistoryRecord),
    Finish,
}

/// Background renderer fed through an ordered channel. Sending never blocks;
/// records that arrive while a render is in progress are coalesced into the
/// next render.
#[derive(Debug)]
pub struct LiveRenderer {
    tx: Sender<Msg>,
    handle: JoinHandle<Result<usize>>,
}

impl LiveRenderer {
    /// Validates the selectors against `header` and starts the render thread.
    pub fn spawn(cfg: VizConfig, header: HeaderRecord) -> Result<Self> {
        cfg.validate(&header)?;
        let (tx, rx) = channel();
        let handle = std::thread::Builder::new()
            .name("slsqp-viz".into())
            .spawn(move || run(cfg, header, rx))
            .map_err(|e| Error::Image(format!("cannot start render thread: {e}")))?;
        Ok(LiveRenderer { tx, handle })
    }

    pub fn live_update(&self, rec: HistoryRecord) {
        // A dead render thread reports its error from finish().
        let _ = self.tx.send(Msg::Record(rec));
    }

    /// Renders any outstanding records, stops the thread and returns the
    /// number of renders performed.
    pub fn finish(self) -> Result<usize> {
        let _ = self.tx.send(Msg::Finish);
        self.handle
            .join()
            .unwrap_or_else(|_| Err(Error::Image("render thread panicked".into())))
    }
}

fn run(cfg: VizConfig, header: HeaderRecord, rx: Receiver<Msg>) -> Result<usize> {
    let mut history = History::new(header);
    let mut renders = 0;
    let mut dirty = false;
    let mut done = false;
    while !done {
        match rx.recv() {
            Ok(Msg::Record(r)) => {
                dirty |= r.is_major();
                history.records.push(r);
            }
            Ok(Msg::Finish) | Err(_) => done = true,
        }
        while let Ok(msg) = rx.try_recv() {
            match msg {
                Msg::Record(r) => {
                    dirty |= r.is_major();
                    history.records.push(r);
                }
                Msg::Finish => done = true,
            }
        }
        let render_now = match cfg.refresh {
            Refresh::EveryMajor => dirty,
            Refresh::Final => done,
        };
        if render_now {
            render_series(&history, &cfg)?;
            renders += 1;
            dirty = false;
        }
    }
    Ok(renders)
}
