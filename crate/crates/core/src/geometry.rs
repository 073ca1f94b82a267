//! Polyline utilities: sweep-based intersection detection and winding numbers.

use std::f64::consts::TAU;

use crate::Complex;

/// Where two segments of a polyline family meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub curve_a: usize,
    pub segment_a: usize,
    pub curve_b: usize,
    pub segment_b: usize,
    pub point: Complex,
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    curve: usize,
    index: usize,
    a: Complex,
    b: Complex,
    xmin: f64,
    xmax: f64,
    closed_len: Option<usize>,
}

fn orient(a: Complex, b: Complex, c: Complex) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn on_segment(a: Complex, b: Complex, p: Complex) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Intersection point of `[a, b]` and `[c, d]`, including touching and collinear overlap.
pub fn segment_intersection(a: Complex, b: Complex, c: Complex, d: Complex) -> Option<Complex> {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        let t = d1 / (d1 - d2);
        return Some(a + (b - a) * t);
    }
    if d1 == 0.0 && on_segment(c, d, a) {
        return Some(a);
    }
    if d2 == 0.0 && on_segment(c, d, b) {
        return Some(b);
    }
    if d3 == 0.0 && on_segment(a, b, c) {
        return Some(c);
    }
    if d4 == 0.0 && on_segment(a, b, d) {
        return Some(d);
    }
    None
}

fn adjacent(s: &Seg, t: &Seg) -> bool {
    if s.curve != t.curve {
        return false;
    }
    let (i, j) = (s.index.min(t.index), s.index.max(t.index));
    if j - i <= 1 {
        return true;
    }
    matches!(s.closed_len, Some(n) if i == 0 && j == n - 1)
}

/// All crossings among the given polylines, skipping the shared vertex of
/// consecutive segments. A curve flagged closed wraps around, so its last and
/// first segments are also treated as neighbours.
pub fn find_crossings(curves: &[(&[Complex], bool)]) -> Vec<Crossing> {
    let mut segs: Vec<Seg> = Vec::new();
    for (ci, (pts, closed)) in curves.iter().enumerate() {
        let n = pts.len().saturating_sub(1);
        for (si, w) in pts.windows(2).enumerate() {
            if w[0] == w[1] {
                continue;
            }
            segs.push(Seg {
                curve: ci,
                index: si,
                a: w[0],
                b: w[1],
                xmin: w[0].re.min(w[1].re),
                xmax: w[0].re.max(w[1].re),
                closed_len: closed.then_some(n),
            });
        }
    }
    segs.sort_by(|s, t| s.xmin.total_cmp(&t.xmin));
    let mut active: Vec<Seg> = Vec::new();
    let mut out = Vec::new();
    for s in segs {
        active.retain(|t| t.xmax >= s.xmin);
        let (ylo, yhi) = (s.a.im.min(s.b.im), s.a.im.max(s.b.im));
        for t in &active {
            if t.a.im.max(t.b.im) < ylo || t.a.im.min(t.b.im) > yhi || adjacent(&s, t) {
                continue;
            }
            if let Some(point) = segment_intersection(s.a, s.b, t.a, t.b) {
                out.push(Crossing {
                    curve_a: t.curve,
                    segment_a: t.index,
                    curve_b: s.curve,
                    segment_b: s.index,
                    point,
                });
            }
        }
        active.push(s);
    }
    out
}

/// Quadratic reference implementation of [`find_crossings`], used as a test oracle.
pub fn find_crossings_brute(curves: &[(&[Complex], bool)]) -> usize {
    let mut segs = Vec::new();
    for (ci, (pts, closed)) in curves.iter().enumerate() {
        let n = pts.len().saturating_sub(1);
        for (si, w) in pts.windows(2).enumerate() {
            if w[0] != w[1] {
                segs.push(Seg {
                    curve: ci,
                    index: si,
                    a: w[0],
                    b: w[1],
                    xmin: 0.0,
                    xmax: 0.0,
                    closed_len: closed.then_some(n),
                });
            }
        }
    }
    let mut count = 0;
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if !adjacent(&segs[i], &segs[j]) && segment_intersection(segs[i].a, segs[i].b, segs[j].a, segs[j].b).is_some() {
                count += 1;
            }
        }
    }
    count
}

/// Total change of argument of a closed sequence of nonzero values, in turns.
pub fn winding_of_values(values: &[Complex]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = values[i];
        let b = values[(i + 1) % n];
        total += (b / a).arg();
    }
    total / TAU
}

/// Winding number of the closed polyline `poly` around `p`.
pub fn winding_number(p: Complex, poly: &[Complex]) -> f64 {
    let shifted: Vec<Complex> = poly.iter().map(|z| *z - p).collect();
    winding_of_values(&shifted)
}

/// Signed area (positive for counter-clockwise) of a closed polyline.
pub fn signed_area(poly: &[Complex]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

/// Total length of a polyline.
pub fn polyline_length(poly: &[Complex]) -> f64 {
    poly.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Largest distance between any two points (by bounding-box diagonal).
pub fn diameter(points: &[Complex]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
}
