//! Numeric forms of the six univalence claims for Type I maps. All statements
//! refer to `f` rotated by `conj(λ)/|λ|`, so they do not depend on the phase
//! of the normalization constant.

use serde::Serialize;

use super::{ConstructedMap, DomainKind};
use crate::{c64, Complex, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub claim: u8,
    pub statement: &'static str,
    pub pass: bool,
    /// Smallest slack in the claimed inequalities (positive when the claim holds).
    pub margin: f64,
}

fn min_step(values: &[f64], sign: f64) -> f64 {
    values.windows(2).map(|w| sign * (w[1] - w[0])).fold(f64::INFINITY, f64::min)
}

fn arg_extreme(values: &[f64], max: bool) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if (max && *v > values[best]) || (!max && *v < values[best]) {
            best = i;
        }
    }
    best
}

/// Evaluates claims 1–6 on uniform samples with step `4ω/N`, where `N` is
/// `samples` rounded up to a multiple of four.
pub fn check_claims(cm: &ConstructedMap, samples: usize) -> Result<Vec<ClaimResult>> {
    if cm.kind() != DomainKind::TypeI {
        return Err(Error::InvalidParameter("the univalence claims concern Type I maps".into()));
    }
    let n = samples.max(8).div_ceil(4) * 4;
    let (om, b) = (cm.omega(), cm.height());
    let h = 4.0 * om / n as f64;
    let q = n / 4;
    let rot = cm.scale.conj() / cm.scale.norm();

    let xs_top: Vec<f64> = (0..=n).map(|j| h * j as f64).collect();
    let top: Vec<Complex> = cm
        .side_values(b, &xs_top, q, cm.f_eval(c64(om, b))?)?
        .into_iter()
        .map(|w| w * rot)
        .collect();
    let arc = |left: f64| -> Result<Vec<Complex>> {
        let xs: Vec<f64> = (1..2 * q).map(|j| left + h * j as f64).collect();
        let start = cm.f_eval(c64(left + om, 0.0))?;
        Ok(cm.side_values(0.0, &xs, q - 1, start)?.into_iter().map(|w| w * rot).collect())
    };
    let left = arc(0.0)?;
    let right = arc(2.0 * om)?;

    let re = |v: &[Complex]| v.iter().map(|w| w.re).collect::<Vec<_>>();
    let im = |v: &[Complex]| v.iter().map(|w| w.im).collect::<Vec<_>>();
    let (top_re, top_im) = (re(&top), im(&top));
    let mid = 2 * q;

    let c1 = min_step(&top_re[..=mid], 1.0).min(min_step(&top_re[mid..], -1.0));

    let ref_im = top_im[0];
    let c2_left = top_im[1..mid].iter().map(|v| ref_im - v).fold(f64::INFINITY, f64::min);
    let c2_right = top_im[mid + 1..n].iter().map(|v| v - ref_im).fold(f64::INFINITY, f64::min);
    let c2 = c2_left.min(c2_right);

    let locate = |values: &[f64], max: bool, offset: f64, target: f64| {
        let i = arg_extreme(values, max);
        h - (offset + h * i as f64 - target).abs()
    };
    let c3 = locate(&top_im, false, 0.0, om).min(locate(&top_im, true, 0.0, 3.0 * om));

    let c4 = min_step(&re(&left), 1.0).min(min_step(&re(&right), -1.0));

    let c5 = locate(&im(&left), true, h, om).min(locate(&im(&right), false, 2.0 * om + h, 3.0 * om));

    let chain = [left[q - 1].im, top_im[q], top_im[3 * q], right[q - 1].im];
    let c6 = chain.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);

    let statements: [(&'static str, f64); 6] = [
        ("Re f increases along the top over [0, 2ω] and decreases over [2ω, 4ω]", c1),
        ("Im f lies below Im f(ω′) on the top over (0, 2ω) and above it over (2ω, 4ω)", c2),
        ("Im f on the top is minimal at ω′ + ω and maximal at ω′ + 3ω", c3),
        ("Re f increases along the bottom over (0, 2ω) and decreases over (2ω, 4ω)", c4),
        ("Im f on the bottom is maximal at ω over (0, 2ω) and minimal at 3ω over (2ω, 4ω)", c5),
        ("Im f(ω) < Im f(ω′ + ω) < Im f(ω′ + 3ω) < Im f(3ω)", c6),
    ];
    Ok(statements
        .iter()
        .enumerate()
        .map(|(i, (statement, margin))| ClaimResult {
            claim: i as u8 + 1,
            statement,
            pass: *margin > 0.0,
            margin: *margin,
        })
        .collect())
}
