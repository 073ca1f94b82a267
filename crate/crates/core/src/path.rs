//! Integration paths inside the period strip.
//!
//! Every path starts at a fixed base point, runs vertically to the height of
//! the target and then horizontally to it. When the horizontal leg would pass
//! within `radius` of a singular point it steps around that point along three
//! sides of a square, on the side of the singular point facing the target.
//! The choice is deterministic, so a multivalued primitive evaluated with
//! these paths has a fixed, documented branch.

use crate::{c64, Complex};

#[derive(Debug, Clone, PartialEq)]
pub struct PathPlanner {
    pub base: Complex,
    /// Horizontal period with which `singular` repeats.
    pub period: f64,
    /// Singular points inside one period `0 ≤ x < period`.
    pub singular: Vec<Complex>,
    pub radius: f64,
}

impl PathPlanner {
    pub fn new(base: Complex, period: f64, singular: Vec<Complex>, radius: f64) -> Self {
        PathPlanner {
            base,
            period,
            singular,
            radius,
        }
    }

    /// Singular points replicated over the periods that a leg from `x0` to `x1` can touch.
    fn singular_near(&self, x0: f64, x1: f64) -> Vec<Complex> {
        let lo = x0.min(x1);
        let hi = x0.max(x1);
        let k0 = ((lo - self.radius) / self.period).floor() as i64 - 1;
        let k1 = ((hi + self.radius) / self.period).ceil() as i64 + 1;
        let mut out = Vec::new();
        for k in k0..=k1 {
            for p in &self.singular {
                out.push(*p + k as f64 * self.period);
            }
        }
        out
    }

    /// Vertices of the path from the base point to `target`.
    pub fn plan(&self, target: Complex) -> Vec<Complex> {
        let mut verts = vec![self.base];
        let corner = c64(self.base.re, target.im);
        if corner != self.base {
            verts.push(corner);
        }
        let (x0, x1, y) = (self.base.re, target.re, target.im);
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let mut blocking: Vec<Complex> = self
            .singular_near(x0, x1)
            .into_iter()
            .filter(|p| {
                let between = (p.re - x0) * dir > 0.0 && (x1 - p.re) * dir > 0.0;
                between && (y - p.im).abs() < self.radius
            })
            .collect();
        blocking.sort_by(|a, b| ((a.re - b.re) * dir).total_cmp(&0.0));
        for p in blocking {
            let y_detour = if y >= p.im {
                p.im + self.radius
            } else {
                p.im - self.radius
            };
            let before = p.re - dir * self.radius;
            let after = p.re + dir * self.radius;
            verts.push(c64(before, y));
            verts.push(c64(before, y_detour));
            verts.push(c64(after, y_detour));
            verts.push(c64(after, y));
        }
        if *verts.last().expect("non-empty") != target {
            verts.push(target);
        }
        verts
    }

    /// Smallest distance from the path to any singular point.
    pub fn clearance(&self, path: &[Complex]) -> f64 {
        let xs = path.iter().map(|z| z.re);
        let lo = xs.clone().fold(f64::INFINITY, f64::min);
        let hi = xs.fold(f64::NEG_INFINITY, f64::max);
        let singular = self.singular_near(lo, hi);
        path.windows(2)
            .flat_map(|w| singular.iter().map(move |p| segment_distance(*p, w[0], w[1])))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Complex, a: Complex, b: Complex) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}
