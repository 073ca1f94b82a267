//! Hollow-vortex reading of a constructed domain.
//!
//! The roof function is the stream function of an ideal flow around the
//! bubbles. In the image plane the velocity is `V = conj(2i ∂_w u)`, which
//! pulls back to `V = conj(2i v_z / F)`. Its modulus equals the gradient
//! modulus `|2 v_z / F|`, so under the unit normalization the bubbles are
//! free streamlines of speed one.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{polyline_length, signed_area};
use crate::mapping::{ConstructedMap, DomainKind};
use crate::quad::{integrate_segment, QuadOptions};
use crate::{c64, Complex, Error, Result, I};

/// Velocity at the image of `z`.
pub fn velocity(cm: &ConstructedMap, z: Complex) -> Result<Complex> {
    Ok((I * 2.0 * cm.roof.v_z(z)? / cm.f_prime(z)?).conj())
}

#[derive(Debug, Clone, Serialize)]
pub struct Streamline {
    pub level: f64,
    /// The level was moved off a critical value of `v`.
    pub saddle: bool,
    /// The level is a boundary constant and the branches are the traced boundary.
    pub boundary: bool,
    pub branches: Vec<Vec<Complex>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Circulation {
    /// Circulation around the bubble from the bottom side, counter-clockwise.
    pub bottom: f64,
    /// Circulation around the bubble from the top side, counter-clockwise.
    pub top: f64,
    /// `8π · Res(v_z, iε)`, the expected value of the sum of both.
    pub residue_total: f64,
    pub perimeters: [f64; 2],
}

/// Far-field velocities in the frame where the bubble row is horizontal.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FarField {
    pub above: Complex,
    pub below: Complex,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowField {
    pub levels: Vec<f64>,
    pub streamlines: Vec<Streamline>,
    pub circulation: Option<Circulation>,
    pub far_field: Option<FarField>,
}

/// Grid of `v` over one period: offset columns `x_i = (i + ½)·4ω/nx` and rows
/// `y_j = b·j/ny` including both sides.
struct VGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    v: Vec<Vec<f64>>,
    width: f64,
}

impl VGrid {
    fn new(cm: &ConstructedMap, nx: usize, ny: usize) -> Result<Self> {
        let width = cm.period_width();
        let b = cm.height();
        let xs: Vec<f64> = (0..nx).map(|i| (i as f64 + 0.5) * width / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|j| b * j as f64 / ny as f64).collect();
        let v = cm.roof.v_on_grid(&xs, &ys)?;
        Ok(VGrid { xs, ys, v, width })
    }

    fn x(&self, i: usize) -> f64 {
        let nx = self.xs.len();
        self.xs[i % nx] + if i >= nx { self.width } else { 0.0 }
    }

    fn max(&self) -> f64 {
        self.v.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// Between nodes `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between nodes `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

/// Pullback polylines of `{v = level}` by marching squares with linear interpolation.
fn march(grid: &VGrid, level: f64) -> Vec<Vec<Complex>> {
    let nx = grid.xs.len();
    let ny = grid.ys.len() - 1;
    let val = |i: usize, j: usize| grid.v[i % nx][j];
    let point = |e: Edge| -> Complex {
        let (a, b, za, zb) = match e {
            Edge::H(i, j) => (val(i, j), val(i + 1, j), c64(grid.x(i), grid.ys[j]), c64(grid.x(i + 1), grid.ys[j])),
            Edge::V(i, j) => (val(i, j), val(i, j + 1), c64(grid.x(i), grid.ys[j]), c64(grid.x(i), grid.ys[j + 1])),
        };
        let t = ((level - a) / (b - a)).clamp(0.0, 1.0);
        za + (zb - za) * t
    };
    let norm = |e: Edge| match e {
        Edge::H(i, j) => Edge::H(i % nx, j),
        Edge::V(i, j) => Edge::V(i % nx, j),
    };
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let c = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            let mask = c.iter().enumerate().fold(0u8, |m, (k, v)| m | (((*v > level) as u8) << k));
            let e = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let centre_above = c.iter().sum::<f64>() / 4.0 > level;
            let pairs: &[(usize, usize)] = match mask {
                0 | 15 => &[],
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 if centre_above => &[(3, 2), (0, 1)],
                5 => &[(3, 0), (1, 2)],
                10 if centre_above => &[(3, 0), (1, 2)],
                10 => &[(3, 2), (0, 1)],
                _ => unreachable!("four-bit mask"),
            };
            for (a, b) in pairs {
                segments.push((norm(e[*a]), norm(e[*b])));
            }
        }
    }
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let walk = |start_edge: Edge, used: &mut Vec<bool>, chain: &mut Vec<Edge>| {
        let mut cur = start_edge;
        loop {
            let next = by_edge
                .get(&cur)
                .and_then(|ks| ks.iter().copied().find(|k| !used[*k]));
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segments[k];
            cur = if a == cur { b } else { a };
            chain.push(cur);
        }
    };
    // Open chains first (ends touch an edge shared by a single segment), then loops.
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|k| {
        let (a, b) = segments[*k];
        let open = by_edge[&a].len() == 1 || by_edge[&b].len() == 1;
        !open
    });
    for k in order {
        if used[k] {
            continue;
        }
        used[k] = true;
        let (a, b) = segments[k];
        let (start, other) = if by_edge[&b].len() == 1 { (b, a) } else { (a, b) };
        let mut chain = vec![start, other];
        walk(other, &mut used, &mut chain);
        let mut back = Vec::new();
        walk(start, &mut used, &mut back);
        back.reverse();
        back.extend(chain);
        chains.push(back);
    }
    // Unwrap x across the seam so that each chain is continuous in the pullback.
    chains
        .into_iter()
        .map(|chain| {
            let mut pts: Vec<Complex> = chain.into_iter().map(point).collect();
            for k in 1..pts.len() {
                let dx = pts[k].re - pts[k - 1].re;
                pts[k].re -= grid.width * (dx / grid.width).round();
            }
            pts
        })
        .collect()
}

const STEP_SPLIT: f64 = 25.0;

/// Maps pullback polylines through `f`, splitting where a branch cut of `f` is
/// crossed or where one image step exceeds `STEP_SPLIT` times the median step
/// of its chain (near a boundary pole), and dropping vertices where `f` is
/// singular.
fn map_through_f(cm: &ConstructedMap, chains: Vec<Vec<Complex>>) -> Result<Vec<Vec<Complex>>> {
    let jump = cm.translation_period().map(|p| p.norm() / 2.0);
    let mut out = Vec::new();
    for chain in chains {
        let images: Vec<Option<Complex>> = chain
            .par_iter()
            .map(|z| match cm.f_eval(*z) {
                Ok(w) => Ok(Some(w)),
                Err(Error::SingularPoint(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let mut steps: Vec<f64> = images
            .windows(2)
            .filter_map(|w| Some((w[1]? - w[0]?).norm()))
            .collect();
        steps.sort_by(f64::total_cmp);
        let median = steps.get(steps.len() / 2).copied().unwrap_or(f64::INFINITY);
        let limit = jump.unwrap_or(f64::INFINITY).min(STEP_SPLIT * median);
        let mut current: Vec<Complex> = Vec::new();
        for w in images {
            match w {
                Some(w) => {
                    if current.last().is_some_and(|last| (w - last).norm() > limit) {
                        out.push(std::mem::take(&mut current));
                    }
                    current.push(w);
                }
                None => out.push(std::mem::take(&mut current)),
            }
        }
        out.push(current);
    }
    out.retain(|c| c.len() >= 2);
    Ok(out)
}

/// Critical value of `v` at the prescribed critical points.
pub fn saddle_value(cm: &ConstructedMap) -> Result<f64> {
    cm.roof.v_value(cm.roof.critical_points()[0])
}

/// Streamlines at both boundary constants, at the saddle level and at
/// `n_levels` equally spaced interior levels up to twice the largest of those
/// values, marched on an `nx × ny` grid.
pub fn extract_streamlines(cm: &ConstructedMap, n_levels: usize, nx: usize, ny: usize) -> Result<FlowField> {
    if nx < 4 || ny < 2 {
        return Err(Error::InvalidParameter("need at least a 4×2 grid".into()));
    }
    let grid = VGrid::new(cm, nx, ny)?;
    let bc = cm.roof.boundary_constants;
    let saddle = saddle_value(cm)?;
    let lo = bc.bottom.min(bc.top);
    let hi = (2.0 * bc.bottom.max(bc.top).max(saddle)).min(grid.max());
    let span = hi - lo;
    let trace = cm.trace_raw(cm.spec.samples_per_side)?;

    let mut streamlines = vec![
        Streamline {
            level: bc.bottom,
            saddle: false,
            boundary: true,
            branches: match cm.kind() {
                DomainKind::TypeII => vec![trace.curves[0].points.clone()],
                DomainKind::TypeI => vec![trace.curves[0].points.clone(), trace.curves[1].points.clone()],
            },
        },
        Streamline {
            level: bc.top,
            saddle: false,
            boundary: true,
            branches: vec![trace.curves[trace.curves.len() - 1].points.clone()],
        },
    ];
    let shifted = saddle + 1e-6 * span;
    streamlines.push(Streamline {
        level: shifted,
        saddle: true,
        boundary: false,
        branches: map_through_f(cm, march(&grid, shifted))?,
    });
    for k in 1..=n_levels {
        let level = lo + span * k as f64 / (n_levels + 1) as f64;
        if streamlines.iter().any(|s| (s.level - level).abs() < 1e-3 * span) {
            continue;
        }
        streamlines.push(Streamline {
            level,
            saddle: false,
            boundary: false,
            branches: map_through_f(cm, march(&grid, level))?,
        });
    }
    streamlines.sort_by(|a, b| a.level.total_cmp(&b.level));
    let levels = streamlines.iter().map(|s| s.level).collect();
    let (circulation, far_field) = match cm.kind() {
        DomainKind::TypeII => {
            let (c, f) = circulation_and_far_field(cm)?;
            (Some(c), Some(f))
        }
        DomainKind::TypeI => (None, None),
    };
    Ok(FlowField {
        levels,
        streamlines,
        circulation,
        far_field,
    })
}

/// Level set through the saddle, marched just above the critical value.
pub fn saddle_streamline(cm: &ConstructedMap, nx: usize, ny: usize) -> Result<Streamline> {
    let grid = VGrid::new(cm, nx, ny)?;
    let s = saddle_value(cm)?;
    let span = grid.max() - cm.roof.boundary_constants.bottom.min(cm.roof.boundary_constants.top);
    let level = s + 1e-6 * span;
    Ok(Streamline {
        level,
        saddle: true,
        boundary: false,
        branches: map_through_f(cm, march(&grid, level))?,
    })
}

/// Pullback level curves of `v` (no mapping); exposed for tests.
pub fn pullback_level_curves(cm: &ConstructedMap, level: f64, nx: usize, ny: usize) -> Result<Vec<Vec<Complex>>> {
    Ok(march(&VGrid::new(cm, nx, ny)?, level))
}

/// Circulations around both bubbles of a period and the two far-field velocities.
pub fn circulation_and_far_field(cm: &ConstructedMap) -> Result<(Circulation, FarField)> {
    let eps = cm
        .roof
        .epsilon
        .ok_or_else(|| Error::InvalidParameter("circulation is defined for Type II domains".into()))?;
    let b = cm.height();
    let width = cm.period_width();
    let opts = QuadOptions::default();
    let vz = |z: Complex| cm.roof.v_z(z);
    let trace = cm.trace_raw(cm.spec.samples_per_side)?;
    let mut gammas = [0.0; 2];
    let mut perimeters = [0.0; 2];
    for (k, y) in [0.0, b].into_iter().enumerate() {
        // Γ = ∮ V·t ds = −2 Im ∮ v_z dz, with the side oriented so its image runs counter-clockwise.
        let along = -2.0 * integrate_segment(&vz, c64(0.0, y), c64(width, y), &opts)?.im;
        let pts = &trace.curves[k].points;
        gammas[k] = along * signed_area(pts).signum();
        perimeters[k] = polyline_length(pts);
    }
    let res = cm.roof.residue().expect("Type II has a residue");
    let rot = cm.alignment();
    let res_f = cm.residue_f().expect("Type II has a residue");
    let mut above = c64(0.0, 0.0);
    let mut below = c64(0.0, 0.0);
    for p in [c64(0.0, eps), c64(2.0 * cm.omega(), eps)] {
        let bp = cm.bfac.eval(p)?;
        let v = (I * 2.0 / (cm.scale * bp)).conj() * rot;
        // Near p, f ≈ Res·log(z − p), whose real part tends to −∞.
        let sign = if p.re == 0.0 { 1.0 } else { -1.0 };
        let direction = -(rot * res_f * sign);
        if direction.im > 0.0 {
            above = v;
        } else {
            below = v;
        }
    }
    Ok((
        Circulation {
            bottom: gammas[0],
            top: gammas[1],
            residue_total: 8.0 * PI * res,
            perimeters,
        },
        FarField { above, below },
    ))
}

/// Finite-difference divergence and curl of the image-plane velocity at the image of `z`.
/// Finite-difference divergence and curl of the velocity in the `w` plane,
/// together with the Frobenius norm of its Jacobian for scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivCurl {
    pub div: f64,
    pub curl: f64,
    pub gradient: f64,
}

pub fn div_curl(cm: &ConstructedMap, z: Complex, h: f64) -> Result<DivCurl> {
    let dx = (velocity(cm, z + h)? - velocity(cm, z - h)?) / (2.0 * h);
    let dy = (velocity(cm, z + I * h)? - velocity(cm, z - I * h)?) / (2.0 * h);
    let f = cm.f_prime(z)?;
    let det = f.norm_sqr();
    let (a, c) = (f.re / det, f.im / det);
    // Inverse of [[Re F, −Im F], [Im F, Re F]] is [[a, c], [−c, a]].
    let d_dx = dx * a - dy * c;
    let d_dy = dx * c + dy * a;
    Ok(DivCurl {
        div: d_dx.re + d_dy.im,
        curl: d_dx.im - d_dy.re,
        gradient: (d_dx.norm_sqr() + d_dy.norm_sqr()).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::DomainSpec;

    fn fig2() -> ConstructedMap {
        ConstructedMap::build(&DomainSpec::fig2().with_samples(256)).unwrap()
    }

    #[test]
    fn speed_is_one_on_the_bubbles() {
        let cm = fig2();
        for x in [0.3, 1.1, 2.6, 3.9] {
            for y in [0.0, cm.height()] {
                let v = velocity(&cm, c64(x, y)).unwrap();
                assert!((v.norm() - 1.0).abs() < 1e-9, "{x} {y} {}", v.norm());
            }
        }
    }

    #[test]
    fn marching_recovers_a_horizontal_level() {
        let cm = ConstructedMap::build(&DomainSpec::fig1().with_samples(256)).unwrap();
        let level = 0.5 * (cm.roof.boundary_constants.top + saddle_value(&cm).unwrap());
        let curves = pullback_level_curves(&cm, level, 64, 32).unwrap();
        assert!(!curves.is_empty());
        let sing = cm.singular_points();
        for c in &curves {
            for z in c.iter().step_by(7).filter(|z| sing.iter().all(|p| [-4.0, 0.0, 4.0].iter().all(|s| (*z - p - s).norm() > 0.25))) {
                let v = cm.roof.v_value(*z).unwrap();
                assert!((v - level).abs() < 2e-2 * level, "{z} {v}");
            }
        }
    }

    #[test]
    fn circulations_share_a_sign_and_match_perimeters() {
        let cm = fig2();
        let (c, far) = circulation_and_far_field(&cm).unwrap();
        assert!(c.bottom * c.top > 0.0);
        assert!(((c.bottom + c.top) / c.residue_total - 1.0).abs() < 1e-9);
        assert!((c.bottom.abs() / c.perimeters[0] - 1.0).abs() < 1e-4);
        assert!((c.top.abs() / c.perimeters[1] - 1.0).abs() < 1e-4);
        assert!(far.above.re * far.below.re < 0.0);
    }

    #[test]
    fn velocity_is_divergence_and_curl_free() {
        let cm = fig2();
        let d = div_curl(&cm, c64(1.3, 1.4), 1e-4).unwrap();
        assert!(d.div.abs().max(d.curl.abs()) < 1e-5 * d.gradient, "{d:?}");
    }

    #[test]
    fn streamline_levels_include_boundaries_and_saddle() {
        let cm = fig2();
        let ff = extract_streamlines(&cm, 4, 48, 24).unwrap();
        let bc = cm.roof.boundary_constants;
        assert!(ff.levels.windows(2).all(|w| w[0] < w[1]));
        assert!(ff.streamlines.iter().any(|s| s.boundary && s.level == bc.top));
        assert!(ff.streamlines.iter().any(|s| s.boundary && s.level == bc.bottom));
        assert_eq!(ff.streamlines.iter().filter(|s| s.saddle).count(), 1);
    }
}
