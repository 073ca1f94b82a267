//! The conformal map `f = ∫ F` from the period rectangle `G = [0, 4ω] × [0, b]`
//! onto one period of a quasi-exceptional domain.
//!
//! `F` has two closed forms that agree up to a constant factor:
//!
//! * the product `v_z · B` of the roof derivative and the unimodular factor;
//! * a quotient of σ functions on the lattice with periods `4ω`, `2ib`,
//!   which is finite at the critical points where the product is `0 · ∞`.
//!
//! The quotient form is the one integrated; the product form is kept for the
//! cross-check and for the boundary identities.

mod claims;
mod trace;

pub use claims::{check_claims, ClaimResult};
pub use trace::{BoundaryTrace, Curve, CurveLabel, Topology, CLOSURE_TOL, SINGULAR_CUTOFF};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::blaschke::BFactor;
use crate::elliptic::{Lattice, LatticeKind, POLE_GUARD};
use crate::path::PathPlanner;
use crate::quad::{integrate_path, integrate_segment, QuadOptions};
use crate::roof::RoofField;
use crate::{c64, Complex, Error, Result, I};

pub use crate::roof::DomainKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `F` is exactly the σ quotient; shape matches the reference figures up to similarity.
    RawSigmaRatio,
    /// `F = 2 v_z B`, which makes the boundary speed `|2 v_z / F|` equal to one.
    NeumannUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// `ω`; the real period of `G` is `4ω`.
    pub omega: f64,
    /// `Im ω′`, the height of `G`.
    pub omega_prime_imag: f64,
    pub epsilon: Option<f64>,
    pub samples_per_side: usize,
    pub normalization: Normalization,
}

pub const MIN_SAMPLES_PER_SIDE: usize = 64;

impl DomainSpec {
    /// The doubly connected example: `ω = 1`, `Im ω′ = 2`.
    pub fn fig1() -> Self {
        DomainSpec {
            kind: DomainKind::TypeI,
            omega: 1.0,
            omega_prime_imag: 2.0,
            epsilon: None,
            samples_per_side: 1024,
            normalization: Normalization::NeumannUnit,
        }
    }

    /// Periodic example with `ω = 1`, `Im ω′ = 2`, `ε = 0.5`.
    pub fn fig2() -> Self {
        DomainSpec {
            kind: DomainKind::TypeII,
            epsilon: Some(0.5),
            ..Self::fig1()
        }
    }

    /// Periodic example with `ω = 1`, `Im ω′ = 1.5`, `ε = 0.4`.
    pub fn fig3() -> Self {
        DomainSpec {
            kind: DomainKind::TypeII,
            omega_prime_imag: 1.5,
            epsilon: Some(0.4),
            ..Self::fig1()
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples_per_side = samples;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// Checks the parameters and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        for (name, value) in [("omega", self.omega), ("omega_prime_imag", self.omega_prime_imag)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if self.samples_per_side < MIN_SAMPLES_PER_SIDE {
            return Err(Error::InvalidParameter(format!(
                "samples_per_side must be at least {MIN_SAMPLES_PER_SIDE}, got {}",
                self.samples_per_side
            )));
        }
        match (self.kind, self.epsilon) {
            (DomainKind::TypeII, None) => {
                return Err(Error::InvalidParameter("a Type II domain needs epsilon".into()))
            }
            (DomainKind::TypeII, Some(e)) if !(e > 0.0 && e < self.omega_prime_imag / 2.0) => {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must satisfy 0 < ε < Im ω′/2 = {}, got {e}",
                    self.omega_prime_imag / 2.0
                )))
            }
            (DomainKind::TypeI, Some(e)) => {
                warnings.push(format!("epsilon = {e} is ignored for a Type I domain"));
            }
            _ => {}
        }
        if self.omega_prime_imag <= self.omega {
            let msg = format!(
                "aspect condition Im ω′ > ω violated: Im ω′ = {}, ω = {}",
                self.omega_prime_imag, self.omega
            );
            if self.normalization == Normalization::RawSigmaRatio {
                return Err(Error::InvalidParameter(msg));
            }
            warnings.push(msg);
        }
        Ok(warnings)
    }
}

/// Outcome of a zero-period integral along one horizontal line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroPeriod {
    pub y: f64,
    pub residual: f64,
    /// `1e−8 · 4ω · max|F|` on the line.
    pub tolerance: f64,
    pub max_abs_f: f64,
}

pub const ZERO_PERIOD_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ConstructedMap {
    pub spec: DomainSpec,
    pub roof: RoofField,
    pub bfac: BFactor,
    pub sigma_lat: Lattice,
    /// `λ` in `F = λ · v_z · B`.
    pub scale: Complex,
    /// `F_σ / (v_z B)`, the constant linking the two closed forms.
    pub sigma_constant: Complex,
    pub base: Complex,
    /// `(z, f(z))` at the midpoints of the side pieces.
    pub f_cache: Vec<(Complex, Complex)>,
    pub warnings: Vec<String>,
    planner: PathPlanner,
    quad: QuadOptions,
}

pub fn build_map(spec: &DomainSpec) -> Result<ConstructedMap> {
    ConstructedMap::build(spec)
}

impl ConstructedMap {
    pub fn build(spec: &DomainSpec) -> Result<Self> {
        let warnings = spec.validate()?;
        let (om, b) = (spec.omega, spec.omega_prime_imag);
        let roof = RoofField::build(spec.kind, om, b, spec.epsilon)?;
        let bfac = BFactor::build(om, b)?;
        let sigma_lat = Lattice::build(om, b, LatticeKind::Sigma)?;
        let (singular, radius) = match roof.epsilon {
            None => (vec![c64(0.0, 0.0), c64(2.0 * om, 0.0)], om.min(b) / 4.0),
            Some(e) => (
                vec![c64(0.0, e), c64(2.0 * om, e)],
                (e / 2.0).min((b - e) / 2.0).min(om / 2.0),
            ),
        };
        let base = c64(om, 0.75 * b);
        let mut cm = ConstructedMap {
            spec: spec.clone(),
            roof,
            bfac,
            sigma_lat,
            scale: c64(1.0, 0.0),
            sigma_constant: c64(1.0, 0.0),
            base,
            f_cache: Vec::new(),
            warnings,
            planner: PathPlanner::new(base, 4.0 * om, singular, radius),
            quad: QuadOptions::default(),
        };
        let z_ref = c64(om / 2.0, 0.8 * b);
        cm.sigma_constant = cm.f_sigma(z_ref)? / cm.f_product(z_ref)?;
        cm.scale = match spec.normalization {
            Normalization::NeumannUnit => c64(2.0, 0.0),
            Normalization::RawSigmaRatio => cm.sigma_constant,
        };

        let spread = cm.cross_form_spread(&cross_form_probe_points(om, b, 8))?;
        if spread > CROSS_FORM_TOL {
            return Err(Error::Construction {
                check: "σ quotient and product forms of F agree",
                residual: spread,
                tolerance: CROSS_FORM_TOL,
            });
        }

        let anchors = [c64(om, 0.0), c64(3.0 * om, 0.0), c64(om, b), c64(3.0 * om, b)];
        cm.f_cache = anchors
            .iter()
            .map(|&z| cm.f_eval(z).map(|w| (z, w)))
            .collect::<Result<_>>()?;
        Ok(cm)
    }

    pub fn kind(&self) -> DomainKind {
        self.spec.kind
    }

    pub fn omega(&self) -> f64 {
        self.spec.omega
    }

    pub fn height(&self) -> f64 {
        self.spec.omega_prime_imag
    }

    /// Width `4ω` of the period rectangle.
    pub fn period_width(&self) -> f64 {
        4.0 * self.spec.omega
    }

    /// Scales `F` by an extra factor; used to inject a known defect.
    pub fn perturb_scale(&mut self, factor: f64) {
        self.scale *= factor;
        for (_, w) in &mut self.f_cache {
            *w *= factor;
        }
    }

    /// Poles of `F` in the closed strip over one period (`0 ≤ x < 4ω`).
    pub fn singular_points(&self) -> &[Complex] {
        &self.planner.singular
    }

    /// `F_σ(z)`, the σ quotient.
    pub fn f_sigma(&self, z: Complex) -> Result<Complex> {
        let (om, b) = (self.omega(), self.height());
        let l = &self.sigma_lat;
        let zeros = [c64(om, -b / 2.0), c64(3.0 * om, -b / 2.0)];
        let poles: [Complex; 4] = match self.roof.epsilon {
            None => [c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0 * om, 0.0), c64(6.0 * om, -2.0 * b)],
            Some(e) => [c64(0.0, e), c64(0.0, -e), c64(2.0 * om, e), c64(6.0 * om, -e - 2.0 * b)],
        };
        for p in poles {
            let d = l.distance_to_lattice(z - p);
            if d < POLE_GUARD {
                return Err(Error::PoleProximity {
                    z,
                    pole: z - l.reduce(z - p).z0,
                    distance: d,
                });
            }
        }
        let num = (l.ln_sigma(z - zeros[0]) + l.ln_sigma(z - zeros[1])) * 2.0;
        let den: Complex = poles.iter().map(|p| l.ln_sigma(z - p)).sum();
        if num.re == f64::NEG_INFINITY {
            return Ok(c64(0.0, 0.0));
        }
        Ok((num - den).exp())
    }

    /// `v_z(z) · B(z)`, unscaled.
    pub fn f_product(&self, z: Complex) -> Result<Complex> {
        Ok(self.roof.v_z(z)? * self.bfac.eval(z)?)
    }

    /// `F = f′`, evaluated through the σ quotient and scaled to `λ · v_z · B`.
    pub fn f_prime(&self, z: Complex) -> Result<Complex> {
        Ok(self.f_sigma(z)? * (self.scale / self.sigma_constant))
    }

    /// `|2 v_z / F|`, the pulled-back gradient magnitude of the roof function.
    pub fn gradient_magnitude(&self, z: Complex) -> Result<f64> {
        Ok((self.roof.v_z(z)? * 2.0 / self.f_prime(z)?).norm())
    }

    /// Largest relative deviation of `F_σ / (v_z B)` from its mean over `points`.
    pub fn cross_form_spread(&self, points: &[Complex]) -> Result<f64> {
        let ratios: Vec<Complex> = points
            .iter()
            .map(|&z| Ok(self.f_sigma(z)? / self.f_product(z)?))
            .collect::<Result<_>>()?;
        let mean: Complex = ratios.iter().sum::<Complex>() / ratios.len() as f64;
        let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
        Ok(spread / mean.norm())
    }

    /// Residue of `F` at `iε` (Type II).
    pub fn residue_f(&self) -> Option<Complex> {
        let e = self.roof.epsilon?;
        let res_v = self.roof.residue()?;
        let b = self.bfac.eval(c64(0.0, e)).ok()?;
        Some(self.scale * res_v * b)
    }

    /// Translation period of the image, `2πi · Res(F, iε)` (Type II).
    pub fn translation_period(&self) -> Option<Complex> {
        self.residue_f().map(|r| I * (2.0 * PI) * r)
    }

    /// Unit rotation that makes the translation period point along `+x`.
    pub fn alignment(&self) -> Complex {
        match self.translation_period() {
            Some(p) => p.conj() / p.norm(),
            None => c64(1.0, 0.0),
        }
    }

    fn reduce_into_strip(&self, z: Complex) -> Result<Complex> {
        let b = self.height();
        let tol = 1e-12 * b;
        if !(z.im >= -tol && z.im <= b + tol) {
            return Err(Error::InvalidParameter(format!("{z} lies outside the strip 0 ≤ Im z ≤ {b}")));
        }
        let period = self.period_width();
        let mut x = z.re.rem_euclid(period);
        if x == period {
            x = 0.0;
        }
        let z = c64(x, z.im.clamp(0.0, b));
        if self.roof.epsilon.is_none() {
            let half = period / 2.0;
            let dx = (x - half * (x / half).round()).abs();
            if dx.hypot(z.im) < 1e-12 * self.omega() {
                return Err(Error::SingularPoint(z));
            }
        }
        Ok(z)
    }

    /// The path used by [`ConstructedMap::f_eval`] to reach `z`.
    pub fn path_to(&self, z: Complex) -> Result<Vec<Complex>> {
        Ok(self.planner.plan(self.reduce_into_strip(z)?))
    }

    /// `f(z)` with `f(base) = 0`; `z` is first reduced modulo `4ω`.
    pub fn f_eval(&self, z: Complex) -> Result<Complex> {
        let path = self.path_to(z)?;
        self.f_along(&path)
    }

    /// Integral of `F` along a polyline.
    pub fn f_along(&self, path: &[Complex]) -> Result<Complex> {
        let f = |z: Complex| self.f_prime(z);
        integrate_path(&f, path, &self.quad)
    }

    /// `∫ F` along the straight segment `[a, b]`.
    pub fn f_segment(&self, a: Complex, b: Complex) -> Result<Complex> {
        let f = |z: Complex| self.f_prime(z);
        integrate_segment(&f, a, b, &self.quad)
    }

    /// `|∫₀^{4ω} F(x + iy) dx|`.
    pub fn zero_period_check(&self, y: f64) -> Result<ZeroPeriod> {
        self.zero_period_with(y, |_| c64(1.0, 0.0))
    }

    /// As [`ConstructedMap::zero_period_check`] with the integrand multiplied by
    /// `1 + amplitude · sin(πx/2ω)`, which breaks the antiperiodicity of `F`.
    pub fn zero_period_perturbed(&self, y: f64, amplitude: f64) -> Result<ZeroPeriod> {
        let k = PI / (2.0 * self.omega());
        self.zero_period_with(y, move |z: Complex| c64(1.0 + amplitude * (k * z.re).sin(), 0.0))
    }

    fn zero_period_with(&self, y: f64, weight: impl Fn(Complex) -> Complex) -> Result<ZeroPeriod> {
        let b = self.height();
        if !(y > 0.0 && y < b) {
            return Err(Error::InvalidParameter(format!("zero-period height must lie in (0, {b}), got {y}")));
        }
        if let Some(e) = self.roof.epsilon {
            if (y - e).abs() < 1e-9 * b {
                return Err(Error::InvalidParameter(format!("the line y = {y} passes through a pole of F")));
            }
        }
        let len = self.period_width();
        let g = |z: Complex| Ok(self.f_prime(z)? * weight(z));
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            ..self.quad
        };
        let a = c64(0.0, y);
        let total = integrate_segment(&g, a, a + len, &opts)?;
        let n = 512;
        let max_abs_f = (0..n)
            .map(|k| self.f_prime(c64(len * (k as f64 + 0.5) / n as f64, y)).map(|w| w.norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(ZeroPeriod {
            y,
            residual: total.norm(),
            tolerance: ZERO_PERIOD_REL_TOL * len * max_abs_f,
            max_abs_f,
        })
    }
}

pub const CROSS_FORM_TOL: f64 = 1e-7;

/// Deterministic interior points away from the critical points and poles,
/// used to compare the two closed forms of `F`.
pub fn cross_form_probe_points(omega: f64, b: f64, n: usize) -> Vec<Complex> {
    (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            let x = 4.0 * omega * t;
            let y = b * (0.15 + 0.7 * ((k as f64 * 0.618_033_988_75).fract()));
            c64(x, y)
        })
        .filter(|z| {
            let w1 = c64(omega, b / 2.0);
            let w2 = c64(3.0 * omega, b / 2.0);
            (z - w1).norm() > 0.05 * b && (z - w2).norm() > 0.05 * b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DomainSpec::fig2().validate().unwrap().is_empty());
        assert!(DomainSpec::fig3().validate().unwrap().is_empty());
        let mut s = DomainSpec::fig2();
        s.epsilon = None;
        assert!(s.validate().is_err());
        let s = DomainSpec::fig2().with_samples(10);
        assert!(s.validate().is_err());
        let mut wide = DomainSpec::fig1();
        wide.omega_prime_imag = 0.8;
        assert_eq!(wide.validate().unwrap().len(), 1);
        assert!(wide.with_normalization(Normalization::RawSigmaRatio).validate().is_err());
    }

    #[test]
    fn anchored_at_base() {
        let cm = ConstructedMap::build(&DomainSpec::fig2()).unwrap();
        assert_eq!(cm.f_eval(cm.base).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn neumann_scale_on_boundary() {
        for spec in [DomainSpec::fig1(), DomainSpec::fig2()] {
            let cm = ConstructedMap::build(&spec).unwrap();
            for x in [0.3, 1.1, 2.9, 3.7] {
                for y in [0.0, spec.omega_prime_imag] {
                    let g = cm.gradient_magnitude(c64(x, y)).unwrap();
                    assert!((g - 1.0).abs() < 1e-9, "{x} {y} {g}");
                }
            }
        }
    }

    #[test]
    fn singular_corner() {
        let cm = ConstructedMap::build(&DomainSpec::fig1()).unwrap();
        assert!(matches!(cm.f_eval(c64(2.0, 0.0)), Err(Error::SingularPoint(_))));
        assert!(matches!(cm.f_eval(c64(4.0, 0.0)), Err(Error::SingularPoint(_))));
    }
}
