use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_claims, ConstructedMap, DomainKind};
use crate::geometry::{diameter, find_crossings, Crossing};
use crate::{c64, Complex, Error, Result};

/// Relative closure tolerance for a traced side.
pub const CLOSURE_TOL: f64 = 1e-6;

/// Distance of the arc cutoff from a singular boundary point, in units of `ω`.
pub const SINGULAR_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveLabel {
    /// Image of the bottom side over `(0, 2ω)`.
    BottomLeftArc,
    /// Image of the bottom side over `(2ω, 4ω)`.
    BottomRightArc,
    /// Image of the top side (Type I).
    TopClosed,
    /// Bubble `k` of a Type II period: 0 from the bottom side, 1 from the top side.
    Bubble(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub label: CurveLabel,
    /// Preimage parameters `x` of the samples along the side.
    pub params: Vec<f64>,
    pub points: Vec<Complex>,
    pub closed: bool,
    pub unbounded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Topology {
    pub closed_curves: usize,
    pub unbounded_arcs: usize,
    pub other_open: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryTrace {
    pub kind: DomainKind,
    pub samples_per_side: usize,
    pub curves: Vec<Curve>,
    /// Translation between consecutive periods of the image (Type II).
    pub period: Option<Complex>,
}

impl BoundaryTrace {
    pub fn topology(&self) -> Topology {
        let closed_curves = self.curves.iter().filter(|c| c.closed).count();
        let unbounded_arcs = self.curves.iter().filter(|c| !c.closed && c.unbounded).count();
        Topology {
            closed_curves,
            unbounded_arcs,
            other_open: self.curves.len() - closed_curves - unbounded_arcs,
        }
    }

    /// Crossings among all curves, together with their translates by `±period`
    /// for periodic traces.
    pub fn crossings(&self) -> Vec<Crossing> {
        let mut owned: Vec<(Vec<Complex>, bool)> = self.curves.iter().map(|c| (c.points.clone(), c.closed)).collect();
        if let Some(p) = self.period {
            for shift in [p, -p] {
                for c in &self.curves {
                    owned.push((c.points.iter().map(|z| z + shift).collect(), c.closed));
                }
            }
        }
        let refs: Vec<(&[Complex], bool)> = owned.iter().map(|(v, c)| (v.as_slice(), *c)).collect();
        find_crossings(&refs)
    }

    /// The curves rotated so that the period is horizontal, repeated over
    /// `copies` consecutive periods (Type I traces are returned unchanged).
    pub fn aligned_periods(&self, copies: usize) -> Vec<(CurveLabel, Vec<Complex>)> {
        let Some(p) = self.period else {
            return self.curves.iter().map(|c| (c.label, c.points.clone())).collect();
        };
        let rot = p.conj() / p.norm();
        let mut out = Vec::new();
        for k in 0..copies.max(1) {
            let shift = p * k as f64;
            for c in &self.curves {
                out.push((c.label, c.points.iter().map(|z| (z + shift) * rot).collect()));
            }
        }
        out
    }

    /// Largest violation, relative to the curve diameter, of the mirror symmetry
    /// `g(4ω − x) = −conj(g(x)) + K` of each aligned bubble.
    pub fn mirror_residual(&self) -> Option<f64> {
        let p = self.period?;
        let rot = p.conj() / p.norm();
        let mut worst: f64 = 0.0;
        for c in &self.curves {
            let g: Vec<Complex> = c.points.iter().map(|z| z * rot).collect();
            let n = g.len() - 1;
            let k = g[n] + g[0].conj();
            let diam = diameter(&g);
            for j in 0..=n {
                worst = worst.max((g[n - j] + g[j].conj() - k).norm() / diam);
            }
        }
        Some(worst)
    }
}

impl ConstructedMap {
    /// Values of `f` at `x_j + iy`, integrating between consecutive samples from
    /// the value `start` at `xs[anchor]`.
    pub(crate) fn side_values(&self, y: f64, xs: &[f64], anchor: usize, start: Complex) -> Result<Vec<Complex>> {
        let pieces: Vec<Complex> = xs
            .par_windows(2)
            .map(|w| self.f_segment(c64(w[0], y), c64(w[1], y)))
            .collect::<Result<_>>()?;
        let mut out = vec![c64(0.0, 0.0); xs.len()];
        out[anchor] = start;
        for j in anchor + 1..xs.len() {
            out[j] = out[j - 1] + pieces[j - 1];
        }
        for j in (0..anchor).rev() {
            out[j] = out[j + 1] - pieces[j];
        }
        Ok(out)
    }

    fn closed_side(&self, label: CurveLabel, y: f64, n: usize) -> Result<Curve> {
        let len = self.period_width();
        let xs: Vec<f64> = (0..=n).map(|j| len * j as f64 / n as f64).collect();
        let start = self.f_eval(c64(0.0, y))?;
        let points = self.side_values(y, &xs, 0, start)?;
        let gap = (points[n] - points[0]).norm();
        let closed = gap <= CLOSURE_TOL * diameter(&points);
        Ok(Curve {
            label,
            params: xs,
            points,
            closed,
            unbounded: false,
        })
    }

    /// One bottom arc over `(x_sing, x_sing + 2ω)`, sampled with clustering
    /// towards the singular endpoints.
    fn bottom_arc(&self, label: CurveLabel, left: f64, n: usize) -> Result<Curve> {
        let om = self.omega();
        let delta = SINGULAR_CUTOFF * om;
        let mid = left + om;
        let half = n / 2;
        let n = 2 * half;
        let xs: Vec<f64> = (0..=n)
            .map(|j| mid - (om - delta) * (PI * j as f64 / n as f64).cos())
            .collect();
        let start = self.f_eval(c64(mid, 0.0))?;
        let points = self.side_values(0.0, &xs, half, start)?;
        let outer = [
            self.f_segment(c64(xs[0], 0.0), c64(left + delta / 10.0, 0.0))? + points[0],
            self.f_segment(c64(xs[n], 0.0), c64(left + 2.0 * om - delta / 10.0, 0.0))? + points[n],
        ];
        let growth = |far: Complex, near: Complex| (far - start).norm() / (near - start).norm();
        let unbounded = growth(outer[0], points[0]) > 5.0 && growth(outer[1], points[n]) > 5.0;
        Ok(Curve {
            label,
            params: xs,
            points,
            closed: false,
            unbounded,
        })
    }

    /// Samples the images of the horizontal sides without testing for crossings.
    pub fn trace_raw(&self, samples_per_side: usize) -> Result<BoundaryTrace> {
        let n = samples_per_side.max(4);
        let b = self.height();
        let curves = match self.kind() {
            DomainKind::TypeII => vec![
                self.closed_side(CurveLabel::Bubble(0), 0.0, n)?,
                self.closed_side(CurveLabel::Bubble(1), b, n)?,
            ],
            DomainKind::TypeI => vec![
                self.bottom_arc(CurveLabel::BottomLeftArc, 0.0, n)?,
                self.bottom_arc(CurveLabel::BottomRightArc, 2.0 * self.omega(), n)?,
                self.closed_side(CurveLabel::TopClosed, b, n)?,
            ],
        };
        Ok(BoundaryTrace {
            kind: self.kind(),
            samples_per_side: n,
            curves,
            period: self.translation_period(),
        })
    }

    /// Traces the boundary at the configured resolution and rejects self-intersecting
    /// traces, naming the failing univalence claims for Type I.
    pub fn trace_boundary(&self) -> Result<BoundaryTrace> {
        let trace = self.trace_raw(self.spec.samples_per_side)?;
        let hits = trace.crossings();
        if !hits.is_empty() {
            let failing_claims = match self.kind() {
                DomainKind::TypeI => check_claims(self, self.spec.samples_per_side)?
                    .into_iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.claim)
                    .collect(),
                DomainKind::TypeII => Vec::new(),
            };
            return Err(Error::SelfIntersection {
                count: hits.len(),
                failing_claims,
            });
        }
        Ok(trace)
    }
}
