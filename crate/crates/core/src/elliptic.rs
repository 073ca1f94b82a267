//! Weierstrass elliptic functions on rectangular lattices.
//!
//! # Conventions
//!
//! A lattice is stored through its half-periods `ω₁ = a` (real, positive) and
//! `ω₃ = i·b` (purely imaginary, `b > 0`); its generators are `2ω₁` and `2ω₃`.
//! The quasi-period constants are `η₁ = ζ(ω₁)` and `η₃ = ζ(ω₃)`, so that
//!
//! ```text
//! ζ(z + 2ωⱼ) = ζ(z) + 2ηⱼ,
//! σ(z + 2ωⱼ) = −σ(z) · exp(2ηⱼ (z + ωⱼ)),
//! η₁ω₃ − η₃ω₁ = iπ/2          (Legendre).
//! ```
//!
//! Evaluation first reduces `z` to the cell `|Re z| ≤ a`, `|Im z| ≤ b` around
//! the origin and then sums the nome (`q = exp(−πb/a)`) expansions
//!
//! ```text
//! ζ(z)  = η₁z/a + k[cot v + 4 Σ q²ⁿ/(1−q²ⁿ) sin 2nv]
//! ℘(z)  = −η₁/a + k²[csc² v − 8 Σ n q²ⁿ/(1−q²ⁿ) cos 2nv]
//! σ(z)  = (1/k) exp(η₁z²/2a) sin v Π (1 − 2q²ⁿ cos 2v + q⁴ⁿ)/(1 − q²ⁿ)²
//! ```
//!
//! with `k = π/2a` and `v = kz`. Inside the reduced cell every term is bounded
//! by `qⁿ`, so a few dozen terms reach double precision for the aspect ratios
//! used by the constructions. The reduction is undone with the quasi-periodicity
//! laws above.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{c64, Complex, Error, Result, I};

/// Points closer than this to a lattice point are treated as poles of ℘, ℘′, ζ.
pub const POLE_GUARD: f64 = 1e-13;

/// Which of the three lattices of the construction to build from `(ω, Im ω′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeKind {
    /// Generators `(ω₁, 2ω₃) = (2ω, 2ω′)`; the lattice of the roof derivative `v_z`.
    Roof,
    /// Generators `(2ω₁, 2ω₃) = (4ω, 2ω′)`; the lattice of the factor `B`.
    B,
    /// Generators `(4ω, 2ω′)`; the σ lattice of the closed-form `F`. Numerically
    /// the same lattice as [`LatticeKind::B`], kept distinct so callers state intent.
    Sigma,
}

/// Position of a point relative to the lattice: `z = reduced + 2m·ω₁ + 2n·ω₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    pub z0: Complex,
    pub m: i64,
    pub n: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lattice {
    /// The flavour this lattice was built as, `None` for a bare rectangular lattice.
    pub kind: Option<LatticeKind>,
    /// Real half-period `ω₁ = a`.
    pub half_period_real: f64,
    /// `b = Im ω₃`.
    pub half_period_imag: f64,
    pub g2: Complex,
    pub g3: Complex,
    pub eta1: Complex,
    pub eta3: Complex,
    pub nome: f64,
    #[serde(skip)]
    series: Series,
}

/// Precomputed nome data: `p = q²` and `pⁿ`, `1/(1 − pⁿ)` for the retained terms.
#[derive(Debug, Clone, Default)]
struct Series {
    p: f64,
    p_pow: Vec<f64>,
    inv_one_minus: Vec<f64>,
}

impl Series {
    fn new(q: f64) -> Self {
        let p = q * q;
        let mut p_pow = Vec::new();
        let mut inv_one_minus = Vec::new();
        let mut pn = 1.0;
        let mut qn = 1.0;
        for n in 1..=4000usize {
            pn *= p;
            qn *= q;
            p_pow.push(pn);
            inv_one_minus.push(1.0 / (1.0 - pn));
            // Terms are bounded by n²·qⁿ inside the reduced cell.
            if qn * ((n * n) as f64) < 1e-19 {
                break;
            }
        }
        Series {
            p,
            p_pow,
            inv_one_minus,
        }
    }

    /// Sums `Σ nʲ (tₙ⁺ ± tₙ⁻)/(1 − pⁿ)` with `t± = (p e^{±2iv})ⁿ`.
    fn lambert(&self, x: Complex, power: i32, minus: bool) -> Complex {
        let step_plus = x * self.p;
        let step_minus = self.p / x;
        let mut tp = Complex::new(1.0, 0.0);
        let mut tm = Complex::new(1.0, 0.0);
        let mut acc = Complex::new(0.0, 0.0);
        for (idx, inv) in self.inv_one_minus.iter().enumerate() {
            tp *= step_plus;
            tm *= step_minus;
            let n = (idx + 1) as f64;
            let t = if minus { tp - tm } else { tp + tm };
            acc += t * (n.powi(power) * inv);
        }
        acc
    }

    /// `Σ nʲ pⁿ/(1 − pⁿ)`.
    fn real_lambert(&self, power: i32) -> f64 {
        self.p_pow
            .iter()
            .zip(&self.inv_one_minus)
            .enumerate()
            .map(|(idx, (pn, inv))| ((idx + 1) as f64).powi(power) * pn * inv)
            .sum()
    }
}

impl Lattice {
    /// Builds one of the construction lattices from `ω > 0` and `Im ω′ > 0`.
    pub fn build(omega: f64, omega_prime_imag: f64, kind: LatticeKind) -> Result<Self> {
        check_positive("omega", omega)?;
        check_positive("omega_prime_imag", omega_prime_imag)?;
        let a = match kind {
            LatticeKind::Roof => omega,
            LatticeKind::B | LatticeKind::Sigma => 2.0 * omega,
        };
        let mut lat = Self::rectangular(a, omega_prime_imag)?;
        lat.kind = Some(kind);
        Ok(lat)
    }

    /// A rectangular lattice with half-periods `a` and `i·b`.
    pub fn rectangular(a: f64, b: f64) -> Result<Self> {
        check_positive("half_period_real", a)?;
        check_positive("half_period_imag", b)?;
        let nome = (-PI * b / a).exp();
        if nome >= 1.0 - 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "degenerate aspect ratio: nome {nome} is too close to 1"
            )));
        }
        let series = Series::new(nome);
        let k = PI / (2.0 * a);
        let eta1 = PI * PI / (12.0 * a) * (1.0 - 24.0 * series.real_lambert(1));
        let g2 = k.powi(4) * 4.0 / 3.0 * (1.0 + 240.0 * series.real_lambert(3));
        let g3 = k.powi(6) * 8.0 / 27.0 * (1.0 - 504.0 * series.real_lambert(5));
        let mut lat = Lattice {
            kind: None,
            half_period_real: a,
            half_period_imag: b,
            g2: c64(g2, 0.0),
            g3: c64(g3, 0.0),
            eta1: c64(eta1, 0.0),
            eta3: Complex::new(0.0, 0.0),
            nome,
            series,
        };
        // η₃ from the ζ expansion at ω₃ itself, independent of the Legendre relation.
        lat.eta3 = lat.zeta_reduced(c64(0.0, b));
        Ok(lat)
    }

    pub fn omega1(&self) -> Complex {
        c64(self.half_period_real, 0.0)
    }

    pub fn omega3(&self) -> Complex {
        c64(0.0, self.half_period_imag)
    }

    /// The two generators `2ω₁`, `2ω₃`.
    pub fn generators(&self) -> [Complex; 2] {
        [self.omega1() * 2.0, self.omega3() * 2.0]
    }

    /// `η₁ω₃ − η₃ω₁ − iπ/2`; zero up to rounding.
    pub fn legendre_residual(&self) -> Complex {
        self.eta1 * self.omega3() - self.eta3 * self.omega1() - I * (PI / 2.0)
    }

    pub fn reduce(&self, z: Complex) -> Reduced {
        let (a, b) = (self.half_period_real, self.half_period_imag);
        let m = (z.re / (2.0 * a)).round();
        let n = (z.im / (2.0 * b)).round();
        Reduced {
            z0: c64(z.re - 2.0 * a * m, z.im - 2.0 * b * n),
            m: m as i64,
            n: n as i64,
        }
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex) -> f64 {
        self.reduce(z).z0.norm()
    }

    /// `z` reduced modulo the lattice and checked against the pole guard.
    fn reduce_checked(&self, z: Complex) -> Result<Reduced> {
        let r = self.reduce(z);
        let distance = r.z0.norm();
        if distance < POLE_GUARD {
            return Err(Error::PoleProximity {
                z,
                pole: z - r.z0,
                distance,
            });
        }
        Ok(r)
    }

    fn k(&self) -> f64 {
        PI / (2.0 * self.half_period_real)
    }

    pub fn wp(&self, z: Complex) -> Result<Complex> {
        let r = self.reduce_checked(z)?;
        let k = self.k();
        let v = r.z0 * k;
        let s = v.sin();
        let x = (v * 2.0 * I).exp();
        let sum = self.series.lambert(x, 1, false);
        Ok(-self.eta1 / self.half_period_real + (s.powi(-2) - sum * 4.0) * (k * k))
    }

    pub fn wp_prime(&self, z: Complex) -> Result<Complex> {
        let r = self.reduce_checked(z)?;
        let k = self.k();
        let v = r.z0 * k;
        let (s, c) = (v.sin(), v.cos());
        let x = (v * 2.0 * I).exp();
        // 16 Σ n² L sin 2nv = −8i Σ n² (t⁺ − t⁻)/(1 − pⁿ)
        let sum = self.series.lambert(x, 2, true);
        Ok((c * -2.0 / (s * s * s) - I * 8.0 * sum) * k.powi(3))
    }

    pub fn zeta(&self, z: Complex) -> Result<Complex> {
        let r = self.reduce_checked(z)?;
        Ok(self.zeta_reduced(r.z0) + self.eta1 * (2.0 * r.m as f64) + self.eta3 * (2.0 * r.n as f64))
    }

    fn zeta_reduced(&self, z0: Complex) -> Complex {
        let k = self.k();
        let v = z0 * k;
        let x = (v * 2.0 * I).exp();
        // 4 Σ L sin 2nv = −2i Σ (t⁺ − t⁻)/(1 − pⁿ)
        let sum = self.series.lambert(x, 0, true);
        self.eta1 * z0 / self.half_period_real + (v.cos() / v.sin() - I * 2.0 * sum) * k
    }

    /// `log σ(z)` on some branch; the real part is `log |σ(z)|` and is `−∞` on
    /// lattice points.
    pub fn ln_sigma(&self, z: Complex) -> Complex {
        let r = self.reduce(z);
        if r.z0 == Complex::new(0.0, 0.0) {
            return c64(f64::NEG_INFINITY, 0.0);
        }
        let a = self.half_period_real;
        let k = self.k();
        let v = r.z0 * k;
        let x = (v * 2.0 * I).exp();
        let xi = x.inv();
        let mut prod = Complex::new(0.0, 0.0);
        for (pn, inv) in self.series.p_pow.iter().zip(&self.series.inv_one_minus) {
            prod += (Complex::new(1.0, 0.0) - x * *pn).ln() + (Complex::new(1.0, 0.0) - xi * *pn).ln()
                + 2.0 * inv.ln();
        }
        let base = c64((2.0 * a / PI).ln(), 0.0) + self.eta1 * r.z0 * r.z0 / (2.0 * a) + v.sin().ln() + prod;
        if r.m == 0 && r.n == 0 {
            return base;
        }
        let (m, n) = (r.m as f64, r.n as f64);
        let shift = self.eta1 * (2.0 * m) + self.eta3 * (2.0 * n);
        let half = self.omega1() * m + self.omega3() * n;
        let parity = (r.m + r.n + r.m * r.n).rem_euclid(2) as f64;
        base + shift * (r.z0 + half) + I * (PI * parity)
    }

    /// The Weierstrass σ function. Entire; may overflow far from the origin, where
    /// [`Lattice::ln_sigma`] should be used instead.
    pub fn sigma(&self, z: Complex) -> Complex {
        self.ln_sigma(z).exp()
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a positive finite number, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn roof_lattice_generators() {
        let lat = Lattice::build(1.0, 2.0, LatticeKind::Roof).unwrap();
        let [g1, g2] = lat.generators();
        assert_eq!(g1, c64(2.0, 0.0));
        assert_eq!(g2, c64(0.0, 4.0));
        let b = Lattice::build(1.0, 2.0, LatticeKind::B).unwrap();
        assert_eq!(b.generators(), [c64(4.0, 0.0), c64(0.0, 4.0)]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Lattice::build(0.0, 1.0, LatticeKind::Roof).is_err());
        assert!(Lattice::build(1.0, -1.0, LatticeKind::Roof).is_err());
        assert!(Lattice::build(f64::NAN, 1.0, LatticeKind::Roof).is_err());
        // q = exp(-π b / a) ≥ 1 − 1e−6 needs b/a ≲ 3e−7.
        assert!(Lattice::rectangular(1.0, 1e-8).is_err());
    }

    #[test]
    fn square_lattice_has_vanishing_g3() {
        let lat = Lattice::rectangular(1.0, 1.0).unwrap();
        assert!(lat.g3.norm() < 1e-12 * lat.g2.norm(), "g3 = {}", lat.g3);
    }

    #[test]
    fn legendre_relation() {
        for (a, b) in [(1.0, 2.0), (2.0, 1.5), (1.0, 1.0), (3.0, 0.7)] {
            let lat = Lattice::rectangular(a, b).unwrap();
            assert!(lat.legendre_residual().norm() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn wp_prime_vanishes_at_half_periods() {
        let lat = Lattice::rectangular(1.0, 2.0).unwrap();
        for h in [lat.omega1(), lat.omega3(), lat.omega1() + lat.omega3()] {
            let d = lat.wp_prime(h).unwrap();
            assert!(d.norm() < 1e-11, "℘′({h}) = {d}");
        }
    }

    #[test]
    fn sigma_normalization() {
        let lat = Lattice::rectangular(1.0, 2.0).unwrap();
        assert_eq!(lat.sigma(c64(0.0, 0.0)), c64(0.0, 0.0));
        let h = 1e-7;
        let d = (lat.sigma(c64(h, 0.0)) - lat.sigma(c64(-h, 0.0))) / (2.0 * h);
        assert!(close(d, c64(1.0, 0.0), 1e-9), "σ′(0) = {d}");
    }

    #[test]
    fn poles_are_reported() {
        let lat = Lattice::rectangular(1.0, 2.0).unwrap();
        let err = lat.wp(c64(2.0, 4.0)).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
        assert!(lat.zeta(c64(0.0, 0.0)).is_err());
        assert!(lat.wp_prime(c64(-2.0, 0.0)).is_err());
        assert!(lat.wp(c64(1e-6, 0.0)).is_ok());
    }

    #[test]
    fn reduction_bookkeeping() {
        let lat = Lattice::rectangular(1.0, 2.0).unwrap();
        let z = c64(0.3, 0.4);
        let far = z + c64(6.0, -8.0);
        let r = lat.reduce(far);
        assert_eq!((r.m, r.n), (3, -2));
        assert!(close(lat.zeta(far).unwrap(), lat.zeta(z).unwrap() + lat.eta1 * 6.0 - lat.eta3 * 4.0, 1e-12));
    }

    #[test]
    fn zeta_derivative_is_minus_wp() {
        let lat = Lattice::rectangular(2.0, 1.5).unwrap();
        let h = 1e-6;
        for z in [c64(0.3, 0.4), c64(-1.7, 1.2), c64(3.1, -2.2)] {
            let d = (lat.zeta(z + h).unwrap() - lat.zeta(z - h).unwrap()) / (2.0 * h);
            assert!(close(d, -lat.wp(z).unwrap(), 1e-6));
        }
    }
}
