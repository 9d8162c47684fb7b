//! A minimal retained drawing: rectangles, lines, polylines, markers and
//! text, rasterized to an RGB buffer or written as SVG.

use std::fmt::Write as _;

use super::font;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

pub const WHITE: Rgb = Rgb(255, 255, 255);
pub const BLACK: Rgb = Rgb(0, 0, 0);
pub const GRID: Rgb = Rgb(220, 220, 220);
pub const AXIS: Rgb = Rgb(90, 90, 90);
pub const SERIES: Rgb = Rgb(31, 119, 180);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Rect {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        fill: Rgb,
    },
    Line {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        color: Rgb,
    },
    Polyline {
        points: Vec<(f64, f64)>,
        color: Rgb,
    },
    Marker {
        x: f64,
        y: f64,
        color: Rgb,
    },
    /// `y` is the top of the text box; `scale` multiplies the 5x7 glyph grid.
    Text {
        x: f64,
        y: f64,
        text: String,
        scale: u32,
        anchor: Anchor,
        color: Rgb,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub shapes: Vec<Shape>,
}

/// Width in pixels of `text` drawn at `scale`, one blank column between glyphs.
pub fn text_width(text: &str, scale: u32) -> f64 {
    let n = text.chars().count();
    if n == 0 {
        return 0.0;
    }
    ((n * (font::WIDTH + 1) - 1) as u32 * scale) as f64
}

pub fn text_height(scale: u32) -> f64 {
    (font::HEIGHT as u32 * scale) as f64
}

struct Raster {
    w: i64,
    h: i64,
    buf: Vec<u8>,
}

impl Raster {
    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x < 0 || y < 0 || x >= self.w || y >= self.h {
            return;
        }
        let i = ((y * self.w + x) * 3) as usize;
        self.buf[i] = c.0;
        self.buf[i + 1] = c.1;
        self.buf[i + 2] = c.2;
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, c: Rgb) {
        let (x0, y0) = (x.round() as i64, y.round() as i64);
        let (x1, y1) = ((x + w).round() as i64, (y + h).round() as i64);
        for yy in y0..y1 {
            for xx in x0..x1 {
                self.put(xx, yy, c);
            }
        }
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, c: Rgb) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as i64;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = (x0 + t * (x1 - x0)).round() as i64;
            let y = (y0 + t * (y1 - y0)).round() as i64;
            self.put(x, y, c);
        }
    }

    fn text(&mut self, x: f64, y: f64, text: &str, scale: u32, anchor: Anchor, c: Rgb) {
        let w = text_width(text, scale);
        let left = match anchor {
            Anchor::Start => x,
            Anchor::Middle => x - w / 2.0,
            Anchor::End => x - w,
        };
        let s = scale as f64;
        for (k, ch) in text.chars().enumerate() {
            let gx = left + (k * (font::WIDTH + 1)) as f64 * s;
            for (row, bits) in font::glyph(ch).iter().enumerate() {
                for (col, b) in bits.chars().enumerate() {
                    if b == '#' {
                        self.rect(gx + col as f64 * s, y + row as f64 * s, s, s, c);
                    }
                }
            }
        }
    }
}

impl Scene {
    pub fn new(width: u32, height: u32) -> Self {
        Scene {
            width,
            height,
            shapes: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Shape) {
        self.shapes.push(s);
    }

    /// Row-major RGB8 pixels.
    pub fn rasterize(&self) -> Vec<u8> {
        let mut r = Raster {
            w: self.width as i64,
            h: self.height as i64,
            buf: vec![255; (self.width * self.height * 3) as usize],
        };
        for shape in &self.shapes {
            match shape {
                Shape::Rect { x, y, w, h, fill } => r.rect(*x, *y, *w, *h, *fill),
                Shape::Line {
                    x0,
                    y0,
                    x1,
                    y1,
                    color,
                } => r.line(*x0, *y0, *x1, *y1, *color),
                Shape::Polyline { points, color } => {
                    for p in points.windows(2) {
                        r.line(p[0].0, p[0].1, p[1].0, p[1].1, *color);
                        r.line(p[0].0, p[0].1 + 1.0, p[1].0, p[1].1 + 1.0, *color);
                    }
                }
                Shape::Marker { x, y, color } => r.rect(x - 2.0, y - 2.0, 5.0, 5.0, *color),
                Shape::Text {
                    x,
                    y,
                    text,
                    scale,
                    anchor,
                    color,
                } => r.text(*x, *y, text, *scale, *anchor, *color),
            }
        }
        r.buf
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        for shape in &self.shapes {
            let _ = match shape {
                Shape::Rect { x, y, w, h, fill } => writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{}"/>"#,
                    fill.hex()
                ),
                Shape::Line {
                    x0,
                    y0,
                    x1,
                    y1,
                    color,
                } => writeln!(
                    s,
                    r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="{}" stroke-width="1"/>"#,
                    color.hex()
                ),
                Shape::Polyline { points, color } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|(x, y)| format!("{x:.2},{y:.2}"))
                        .collect();
                    writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                        pts.join(" "),
                        color.hex()
                    )
                }
                Shape::Marker { x, y, color } => writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="{}"/>"#,
                    x - 2.0,
                    y - 2.0,
                    color.hex()
                ),
                Shape::Text {
                    x,
                    y,
                    text,
                    scale,
                    anchor,
                    color,
                } => {
                    let anchor = match anchor {
                        Anchor::Start => "start",
                        Anchor::Middle => "middle",
                        Anchor::End => "end",
                    };
                    let size = text_height(*scale) * 1.4;
                    writeln!(
                        s,
                        r#"<text x="{x:.2}" y="{:.2}" font-family="monospace" font-size="{size:.1}" text-anchor="{anchor}" fill="{}">{}</text>"#,
                        y + text_height(*scale),
                        color.hex(),
                        escape(text)
                    )
                }
            };
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
