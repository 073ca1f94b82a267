//! Adaptive Gauss–Kronrod quadrature for complex integrands along straight
//! segments and polygonal paths in the complex plane.
//!
//! The adaptive driver is global: the panel with the largest error estimate
//! is bisected until the summed estimate drops below
//! `max(abs_tol, rel_tol · ∫|f||dz|)`. The per-panel estimate is the plain
//! `|K15 − G7|` difference, which is pessimistic for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Complex, Error, Result};

/// Positive Kronrod abscissae of the 15-point rule, centre first.
const XK: [f64; 8] = [
    0.000000000000000000000000000000000,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];

const WK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];

/// Weights of the embedded 7-point Gauss rule on `XK[0], XK[2], XK[4], XK[6]`.
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: Complex,
    b: Complex,
    value: Complex,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One G7K15 application on the segment `[a, b]`.
fn gk15<F>(f: &F, a: Complex, b: Complex) -> Result<Panel>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let centre = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let fc = f(centre)?;
    let mut kronrod = fc * WK[0];
    let mut gauss = fc * WG[0];
    let mut abs_value = fc.norm() * WK[0];
    for j in 1..8 {
        let f1 = f(centre - half * XK[j])?;
        let f2 = f(centre + half * XK[j])?;
        let pair = f1 + f2;
        kronrod += pair * WK[j];
        abs_value += (f1.norm() + f2.norm()) * WK[j];
        if j % 2 == 0 {
            gauss += pair * WG[j / 2];
        }
    }
    let scale = half.norm();
    let value = kronrod * half;
    let abs_value = abs_value * scale;
    let mut error = ((kronrod - gauss) * half).norm();
    // Below this the difference is dominated by rounding in the sums.
    let floor = 50.0 * f64::EPSILON * abs_value;
    if error < floor {
        error = floor;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Quadrature {
            a,
            b,
            estimate: f64::INFINITY,
            subdivisions: 0,
        });
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        abs_value,
    })
}

/// A single fixed 15-point Kronrod evaluation, without error control. Exact for
/// polynomials of degree 22 in the segment parameter.
pub fn fixed_k15<F>(f: &F, a: Complex, b: Complex) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    gk15(f, a, b).map(|p| p.value)
}

/// The 15 Kronrod nodes on `[a, b]`, ordered from `a` to `b`.
pub fn k15_nodes(a: Complex, b: Complex) -> [Complex; 15] {
    let centre = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let mut out = [centre; 15];
    for j in 1..8 {
        out[7 - j] = centre - half * XK[j];
        out[7 + j] = centre + half * XK[j];
    }
    out
}

/// Kronrod weights matching [`k15_nodes`] on the reference interval `[-1, 1]`.
pub fn k15_weights() -> [f64; 15] {
    let mut out = [WK[0]; 15];
    for j in 1..8 {
        out[7 - j] = WK[j];
        out[7 + j] = WK[j];
    }
    out
}

/// `∫_a^b f(z) dz` along the straight segment from `a` to `b`.
pub fn integrate_segment<F>(f: &F, a: Complex, b: Complex, opts: &QuadOptions) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    if a == b {
        return Ok(Complex::new(0.0, 0.0));
    }
    let first = gk15(f, a, b)?;
    let mut total = first.value;
    let mut total_error = first.error;
    let mut total_abs = first.abs_value;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;
    while total_error > opts.abs_tol.max(opts.rel_tol * total_abs) {
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: total_error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = (worst.a + worst.b) * 0.5;
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // Recompute the sum from the panels to shed accumulated update rounding.
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integral along the polygonal path through `vertices`.
pub fn integrate_path<F>(f: &F, vertices: &[Complex], opts: &QuadOptions) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    vertices
        .windows(2)
        .map(|w| integrate_segment(f, w[0], w[1], opts))
        .sum()
}

/// Composite Simpson rule with `n` (rounded up to even) panels. Kept for
/// cross-checking the adaptive driver.
pub fn simpson<F>(f: &F, a: Complex, b: Complex, n: usize) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + h * i as f64)? * w;
    }
    Ok(acc * h / 3.0)
}
