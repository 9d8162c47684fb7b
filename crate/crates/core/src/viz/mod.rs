//! Line charts of saved iteration data.
//!
//! Each selector becomes one panel plotted against the major iteration
//! number. A selector is a scalar name (`objective`, `optimality`, ...) or an
//! indexed vector entry such as `x[0]` or `constraints[1]`. Output is PNG,
//! or SVG when the path ends in `.svg`.

mod font;
mod live;
mod scene;

use std::path::{Path, PathBuf};

use crate::error::{io, Error, Result};
use crate::history::{format_sci, HeaderRecord, History, RecordValues};

pub use live::LiveRenderer;
pub use scene::{Scene, Shape};

pub const DEFAULT_VARS: [&str; 3] = ["objective", "optimality", "feasibility"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Refresh {
    /// Re-render after every major iteration.
    #[default]
    EveryMajor,
    /// Render once when the run ends.
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VizConfig {
    pub vars: Vec<String>,
    pub out_path: PathBuf,
    pub refresh: Refresh,
}

impl VizConfig {
    pub fn new<S: AsRef<str>>(vars: &[S], out_path: impl Into<PathBuf>) -> Self {
        VizConfig {
            vars: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            out_path: out_path.into(),
            refresh: Refresh::EveryMajor,
        }
    }

    /// Objective, optimality and feasibility panels.
    pub fn default_vars(out_path: impl Into<PathBuf>) -> Self {
        VizConfig::new(&DEFAULT_VARS, out_path)
    }

    pub fn with_refresh(mut self, refresh: Refresh) -> Self {
        self.refresh = refresh;
        self
    }

    /// Checks selector syntax and names without reference to a history.
    pub fn validate_syntax(&self) -> Result<()> {
        if self.vars.is_empty() {
            return Err(Error::InvalidOption(
                "visualization needs at least one series".into(),
            ));
        }
        for v in &self.vars {
            Selector::parse(v)?;
        }
        Ok(())
    }

    /// Checks every selector against the variables and sizes in `header`.
    pub fn validate(&self, header: &HeaderRecord) -> Result<Vec<Selector>> {
        self.validate_syntax()?;
        self.vars
            .iter()
            .map(|v| Selector::parse(v)?.check(header).cloned())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vector {
    X,
    Constraints,
    Gradient,
    Multipliers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    Objective,
    Optimality,
    OptimalityScaled,
    Feasibility,
    FeasibilityScaled,
    Step,
    Nfev,
    Ngev,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    text: String,
    kind: SelectorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SelectorKind {
    Scalar(Scalar),
    Entry(Vector, usize),
}

impl Selector {
    pub fn parse(s: &str) -> Result<Selector> {
        let t = s.trim();
        let unknown = || Error::UnknownSeries(s.to_string());
        let kind = if let Some(open) = t.find('[') {
            let name = &t[..open];
            let idx = t[open + 1..].strip_suffix(']').ok_or_else(unknown)?;
            let idx: usize = idx.trim().parse().map_err(|_| unknown())?;
            let v = match name {
                "x" => Vector::X,
                "constraints" => Vector::Constraints,
                "gradient" => Vector::Gradient,
                "multipliers" => Vector::Multipliers,
                _ => return Err(unknown()),
            };
            SelectorKind::Entry(v, idx)
        } else {
            SelectorKind::Scalar(match t {
                "objective" => Scalar::Objective,
                "optimality" => Scalar::Optimality,
                "optimality_scaled" => Scalar::OptimalityScaled,
                "feasibility" => Scalar::Feasibility,
                "feasibility_scaled" => Scalar::FeasibilityScaled,
                "step" => Scalar::Step,
                "nfev" => Scalar::Nfev,
                "ngev" => Scalar::Ngev,
                _ => return Err(unknown()),
            })
        };
        Ok(Selector {
            text: t.to_string(),
            kind,
        })
    }

    pub fn label(&self) -> &str {
        &self.text
    }

    /// Save-file variable the selector reads from.
    pub fn source_var(&self) -> &'static str {
        match self.kind {
            SelectorKind::Scalar(s) => match s {
                Scalar::Objective => "objective",
                Scalar::Optimality | Scalar::OptimalityScaled => "optimality",
                Scalar::Feasibility | Scalar::FeasibilityScaled => "feasibility",
                Scalar::Step => "step",
                Scalar::Nfev => "nfev",
                Scalar::Ngev => "ngev",
            },
            SelectorKind::Entry(v, _) => match v {
                Vector::X => "x",
                Vector::Constraints => "constraints",
                Vector::Gradient => "gradient",
                Vector::Multipliers => "multipliers",
            },
        }
    }

    fn check(&self, header: &HeaderRecord) -> Result<&Selector> {
        if !header.saves(self.source_var()) {
            return Err(Error::UnknownSeries(format!(
                "{} (not saved in this history)",
                self.text
            )));
        }
        if let SelectorKind::Entry(v, i) = self.kind {
            let len = match v {
                Vector::X | Vector::Gradient => header.n,
                Vector::Constraints | Vector::Multipliers => header.m,
            };
            if i >= len {
                return Err(Error::IndexOutOfRange {
                    selector: self.text.clone(),
                    len,
                });
            }
        }
        Ok(self)
    }

    pub fn value(&self, r: &RecordValues) -> Option<f64> {
        let v = match self.kind {
            SelectorKind::Scalar(s) => match s {
                Scalar::Objective => r.objective,
                Scalar::Optimality => r.optimality,
                Scalar::OptimalityScaled => r.optimality_scaled,
                Scalar::Feasibility => r.feasibility,
                Scalar::FeasibilityScaled => r.feasibility_scaled,
                Scalar::Step => r.step,
                Scalar::Nfev => r.nfev.map(|v| v as f64),
                Scalar::Ngev => r.ngev.map(|v| v as f64),
            },
            SelectorKind::Entry(v, i) => {
                let vec = match v {
                    Vector::X => r.x.as_ref(),
                    Vector::Constraints => r.constraints.as_ref(),
                    Vector::Gradient => r.gradient.as_ref(),
                    Vector::Multipliers => r.multipliers.as_ref(),
                };
                vec.and_then(|v| v.get(i).copied())
            }
        };
        v.filter(|x| x.is_finite())
    }

    fn prefers_log(&self) -> bool {
        matches!(self.source_var(), "optimality" | "feasibility")
    }
}

/// One panel's data: `(iteration, value)` with `None` where the record lacks
/// the series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, Option<f64>)>,
    pub log_scale: bool,
}

impl Series {
    pub fn present(&self) -> usize {
        self.points.iter().filter(|p| p.1.is_some()).count()
    }
}

pub fn extract_series(history: &History, selectors: &[Selector]) -> Vec<Series> {
    selectors
        .iter()
        .map(|sel| {
            let points: Vec<(f64, Option<f64>)> = history
                .majors()
                .enumerate()
                .map(|(k, r)| (r.majiter.unwrap_or(k) as f64, sel.value(r)))
                .collect();
            let log_scale = sel.prefers_log() && points.iter().filter_map(|p| p.1).all(|v| v > 0.0);
            Series {
                label: sel.label().to_string(),
                points,
                log_scale,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderReport {
    pub path: PathBuf,
    pub panels: usize,
    /// Points drawn in each panel.
    pub points: Vec<usize>,
}

const WIDTH: u32 = 720;
const PANEL_HEIGHT: u32 = 200;
const LEFT: f64 = 86.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 26.0;
const BOTTOM: f64 = 26.0;

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

pub fn build_scene(series: &[Series]) -> Scene {
    use scene::{Anchor, AXIS, BLACK, GRID, SERIES, WHITE};
    let height = PANEL_HEIGHT * series.len().max(1) as u32;
    let mut sc = Scene::new(WIDTH, height);
    sc.push(Shape::Rect {
        x: 0.0,
        y: 0.0,
        w: WIDTH as f64,
        h: height as f64,
        fill: WHITE,
    });
    for (p, s) in series.iter().enumerate() {
        let y0 = p as f64 * PANEL_HEIGHT as f64;
        let (left, right) = (LEFT, WIDTH as f64 - RIGHT);
        let (top, bottom) = (y0 + TOP, y0 + PANEL_HEIGHT as f64 - BOTTOM);
        let title = if s.log_scale {
            format!("{} (log)", s.label)
        } else {
            s.label.clone()
        };
        sc.push(Shape::Text {
            x: (left + right) / 2.0,
            y: y0 + 8.0,
            text: title,
            scale: 2,
            anchor: Anchor::Middle,
            color: BLACK,
        });

        let tf = |v: f64| if s.log_scale { v.log10() } else { v };
        let vals: Vec<f64> = s.points.iter().filter_map(|p| p.1).map(tf).collect();
        let xs: Vec<f64> = s.points.iter().map(|p| p.0).collect();
        let (xmin, xmax) = match (xs.first(), xs.last()) {
            (Some(&a), Some(&b)) if b > a => (a, b),
            (Some(&a), _) => (a - 0.5, a + 0.5),
            _ => (0.0, 1.0),
        };
        let (ymin, ymax) = if vals.is_empty() {
            (0.0, 1.0)
        } else {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            nice_range(lo, hi)
        };
        let px = |x: f64| left + (x - xmin) / (xmax - xmin) * (right - left);
        let py = |y: f64| bottom - (y - ymin) / (ymax - ymin) * (bottom - top);

        for t in 0..=4 {
            let gy = top + (bottom - top) * t as f64 / 4.0;
            sc.push(Shape::Line {
                x0: left,
                y0: gy,
                x1: right,
                y1: gy,
                color: GRID,
            });
        }
        sc.push(Shape::Line {
            x0: left,
            y0: top,
            x1: left,
            y1: bottom,
            color: AXIS,
        });
        sc.push(Shape::Line {
            x0: left,
            y0: bottom,
            x1: right,
            y1: bottom,
            color: AXIS,
        });

        let ylab = |v: f64| {
            let v = if s.log_scale { 10f64.powf(v) } else { v };
            format_sci(v, 2)
        };
        for (v, y) in [
            (ymax, top),
            ((ymin + ymax) / 2.0, (top + bottom) / 2.0),
            (ymin, bottom),
        ] {
            sc.push(Shape::Text {
                x: left - 6.0,
                y: y - 3.5,
                text: ylab(v),
                scale: 1,
                anchor: Anchor::End,
                color: BLACK,
            });
        }
        let xticks: Vec<f64> = if xmax - xmin <= 10.0 {
            (xmin.ceil() as i64..=xmax.floor() as i64)
                .map(|v| v as f64)
                .collect()
        } else {
            (0..=5)
                .map(|t| (xmin + (xmax - xmin) * t as f64 / 5.0).round())
                .collect()
        };
        for xv in xticks {
            let x = px(xv);
            sc.push(Shape::Line {
                x0: x,
                y0: bottom,
                x1: x,
                y1: bottom + 4.0,
                color: AXIS,
            });
            sc.push(Shape::Text {
                x,
                y: bottom + 7.0,
                text: format!("{}", xv as i64),
                scale: 1,
                anchor: Anchor::Middle,
                color: BLACK,
            });
        }

        let mut run: Vec<(f64, f64)> = Vec::new();
        for &(x, v) in &s.points {
            match v {
                Some(v) => {
                    let pt = (px(x), py(tf(v)));
                    sc.push(Shape::Marker {
                        x: pt.0,
                        y: pt.1,
                        color: SERIES,
                    });
                    run.push(pt);
                }
                None => {
                    if run.len() > 1 {
                        sc.push(Shape::Polyline {
                            points: std::mem::take(&mut run),
                            color: SERIES,
                        });
                    }
                    run.clear();
                }
            }
        }
        if run.len() > 1 {
            sc.push(Shape::Polyline {
                points: run,
                color: SERIES,
            });
        }
    }
    sc
}

fn is_svg(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("svg"))
}

/// Encodes `scene` to `path`, PNG unless the extension is `.svg`.
pub fn write_scene(scene: &Scene, path: &Path) -> Result<()> {
    if is_svg(path) {
        std::fs::write(path, scene.to_svg()).map_err(|e| io(path, e))
    } else {
        let img = image::RgbImage::from_raw(scene.width, scene.height, scene.rasterize())
            .expect("buffer matches dimensions");
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::Image(e.to_string()))?;
        std::fs::write(path, bytes).map_err(|e| io(path, e))
    }
}

/// Renders one panel per selector in `cfg` from the major records of
/// `history` and writes the image to `cfg.out_path`.
pub fn render_series(history: &History, cfg: &VizConfig) -> Result<RenderReport> {
    let selectors = cfg.validate(&history.header)?;
    let series = extract_series(history, &selectors);
    write_scene(&build_scene(&series), &cfg.out_path)?;
    Ok(RenderReport {
        path: cfg.out_path.clone(),
        panels: series.len(),
        points: series.iter().map(Series::present).collect(),
    })
}
