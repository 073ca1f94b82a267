//! CSV and SVG emission of labelled polylines.
//!
//! Floats are written with Rust's `Display`, the shortest string that parses
//! back to the same `f64`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use qed_core::{c64, Complex};

/// A named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub id: String,
    pub points: Vec<Complex>,
    pub closed: bool,
}

pub const CSV_HEADER: [&str; 3] = ["curve_id", "x", "y"];

pub fn write_csv<W: Write>(out: W, curves: &[Polyline]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in curves {
        for p in &c.points {
            w.write_record([c.id.as_str(), &p.re.to_string(), &p.im.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `curve_id,x,y` rows back into polylines, grouping consecutive rows
/// with the same id. The `closed` flag is not part of the format and is set
/// to `false`.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Polyline>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        bail!("expected header {:?}, found {:?}", CSV_HEADER, header);
    }
    let mut curves: Vec<Polyline> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .context("short row")?
                .parse()
                .with_context(|| format!("row {}: bad number", line + 2))
        };
        let (id, p) = (rec.get(0).context("short row")?, c64(parse(1)?, parse(2)?));
        match curves.last_mut() {
            Some(c) if c.id == id => c.points.push(p),
            _ => curves.push(Polyline {
                id: id.to_string(),
                points: vec![p],
                closed: false,
            }),
        }
    }
    Ok(curves)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn bounding(points: impl IntoIterator<Item = Complex>) -> Option<Window> {
        let mut it = points.into_iter().filter(|p| p.re.is_finite() && p.im.is_finite());
        let first = it.next()?;
        let mut w = Window {
            x0: first.re,
            x1: first.re,
            y0: first.im,
            y1: first.im,
        };
        for p in it {
            w.x0 = w.x0.min(p.re);
            w.x1 = w.x1.max(p.re);
            w.y0 = w.y0.min(p.im);
            w.y1 = w.y1.max(p.im);
        }
        Some(w)
    }

    /// The window scaled by `factor` about its centre.
    pub fn scaled(self, factor: f64) -> Window {
        let (cx, cy) = ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0);
        let (hx, hy) = (factor * (self.x1 - self.x0) / 2.0, factor * (self.y1 - self.y0) / 2.0);
        Window {
            x0: cx - hx,
            x1: cx + hx,
            y0: cy - hy,
            y1: cy + hy,
        }
    }

    /// The smallest square with the same centre that contains the window.
    pub fn squared(self) -> Window {
        let side = (self.x1 - self.x0).max(self.y1 - self.y0);
        let (cx, cy) = ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0);
        Window {
            x0: cx - side / 2.0,
            x1: cx + side / 2.0,
            y0: cy - side / 2.0,
            y1: cy + side / 2.0,
        }
    }

    /// The window grown by `fraction` of its larger side on every edge.
    pub fn with_margin(self, fraction: f64) -> Window {
        let m = fraction * (self.x1 - self.x0).max(self.y1 - self.y0).max(f64::MIN_POSITIVE);
        Window {
            x0: self.x0 - m,
            x1: self.x1 + m,
            y0: self.y0 - m,
            y1: self.y1 + m,
        }
    }

    fn contains(&self, p: Complex) -> bool {
        p.re >= self.x0 && p.re <= self.x1 && p.im >= self.y0 && p.im <= self.y1
    }

    /// Parameter interval of `a + t (b − a)` inside the window (Liang–Barsky).
    fn clip_segment(&self, a: Complex, b: Complex) -> Option<(f64, f64)> {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (p, q) in [
            (-d.re, a.re - self.x0),
            (d.re, self.x1 - a.re),
            (-d.im, a.im - self.y0),
            (d.im, self.y1 - a.im),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let t = q / p;
                if p < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// Splits a polyline into the runs that lie inside `window`, inserting the
/// points where it enters and leaves.
pub fn clip(line: &Polyline, window: &Window) -> Vec<Polyline> {
    if line.points.iter().all(|p| window.contains(*p)) {
        return vec![line.clone()];
    }
    let mut runs: Vec<Vec<Complex>> = Vec::new();
    let mut current: Vec<Complex> = Vec::new();
    let mut pts = line.points.clone();
    if line.closed {
        pts.push(pts[0]);
    }
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        match window.clip_segment(a, b) {
            Some((t0, t1)) => {
                let (pa, pb) = (a + (b - a) * t0, a + (b - a) * t1);
                if current.is_empty() {
                    current.push(pa);
                }
                current.push(pb);
                if t1 < 1.0 {
                    runs.push(std::mem::take(&mut current));
                }
            }
            None => {
                if !current.is_empty() {
                    runs.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs.into_iter()
        .filter(|r| r.len() >= 2)
        .enumerate()
        .map(|(k, points)| Polyline {
            id: format!("{}.{k}", line.id),
            points,
            closed: false,
        })
        .collect()
}

/// Stroke-only SVG of `curves` with a viewBox from their bounding box plus a
/// 5% margin. The `y` axis points up in the drawing.
pub fn svg(curves: &[Polyline]) -> String {
    let win = Window::bounding(curves.iter().flat_map(|c| c.points.iter().copied()))
        .unwrap_or(Window {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        })
        .with_margin(0.05);
    let (w, h) = (win.x1 - win.x0, win.y1 - win.y0);
    let stroke = 0.002 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        win.x0,
        -win.y1,
        w,
        h,
        (800.0 * h / w).round()
    );
    let _ = writeln!(s, r#"<g fill="none" stroke="black" stroke-width="{stroke}" stroke-linejoin="round">"#);
    for c in curves {
        let mut d = String::new();
        for (k, p) in c.points.iter().enumerate() {
            let _ = write!(d, "{}{} {}", if k == 0 { "M" } else { " L" }, p.re, -p.im);
        }
        if c.closed {
            d.push_str(" Z");
        }
        let _ = writeln!(s, r#"<path id="{}" d="{d}"/>"#, c.id);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polyline {
        Polyline {
            id: "sq".into(),
            points: vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 1.0), c64(0.0, 1.0)],
            closed: true,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let curves = vec![
            Polyline {
                id: "a".into(),
                points: vec![c64(0.1, -1e-300), c64(1.0 / 3.0, 2f64.sqrt()), c64(-7.5e12, 123.456)],
                closed: false,
            },
            square(),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &curves).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in curves.iter().zip(&back) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.points, b.points);
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_csv("id,x,y\na,1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn clipping_splits_runs() {
        let line = Polyline {
            id: "z".into(),
            points: vec![c64(-2.0, 0.5), c64(0.5, 0.5), c64(3.0, 0.5), c64(3.0, 0.7), c64(0.5, 0.7)],
            closed: false,
        };
        let win = Window {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        };
        let runs = clip(&line, &win);
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].points, vec![c64(0.0, 0.5), c64(0.5, 0.5), c64(1.0, 0.5)]);
        assert_eq!(runs[1].points, vec![c64(1.0, 0.7), c64(0.5, 0.7)]);
        assert_eq!(clip(&square(), &win.scaled(2.0)), vec![square()]);
    }

    #[test]
    fn svg_has_one_path_per_curve() {
        let s = svg(&[square(), square()]);
        assert_eq!(s.matches("<path").count(), 2);
        assert!(s.contains(r#"viewBox="-0.05 -1.05 1.1 1.1""#), "{s}");
        assert!(s.contains("Z\"/>"));
    }
}
