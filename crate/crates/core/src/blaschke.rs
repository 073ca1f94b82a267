//! The elliptic factor `B` that is unimodular on both horizontal sides.
//!
//! `B` lives on the lattice with half-periods `2ω` and `i·b`. It has simple
//! poles at `p₁ = ω + ib/2`, `p₂ = 3ω + ib/2` and zeros at `p̄₁` and `p̄₂ + 2ib`,
//! the latter shifted so that the zeros and poles have the same sum exactly:
//!
//! ```text
//! B(z) = κ · σ(z − p̄₁) σ(z − p̄₂ − 2ib) / (σ(z − p₁) σ(z − p₂)).
//! ```
//!
//! `|κ|` is set by `|B(ω/2)| = 1` and `arg κ` by `B(ω) = i`.

use serde::Serialize;

use crate::elliptic::{Lattice, LatticeKind, POLE_GUARD};
use crate::{c64, Complex, Error, Result, I};

#[derive(Debug, Clone, Serialize)]
pub struct BFactor {
    pub lat: Lattice,
    pub poles: [Complex; 2],
    pub zeros: [Complex; 2],
    pub kappa: Complex,
}

/// Largest tolerated deviation of `|B|` from one at the normalization checks.
const NORMALIZATION_TOL: f64 = 1e-8;

impl BFactor {
    pub fn build(omega: f64, b: f64) -> Result<Self> {
        let lat = Lattice::build(omega, b, LatticeKind::B)?;
        let p1 = c64(omega, b / 2.0);
        let p2 = c64(3.0 * omega, b / 2.0);
        let mut bf = BFactor {
            lat,
            poles: [p1, p2],
            zeros: [p1.conj(), p2.conj() + c64(0.0, 2.0 * b)],
            kappa: c64(1.0, 0.0),
        };
        let x0 = c64(omega / 2.0, 0.0);
        bf.kappa = c64(1.0 / bf.eval(x0)?.norm(), 0.0);
        let at_omega = bf.eval(c64(omega, 0.0))?;
        bf.kappa *= I / at_omega;

        let checks = [
            ("|B| = 1 on the real axis", (bf.eval(c64(0.37 * omega, 0.0))?.norm() - 1.0).abs()),
            ("|B| = 1 on the top side", (bf.eval(c64(0.37 * omega, b))?.norm() - 1.0).abs()),
            ("conjugation symmetry", bf.conjugation_residual(c64(0.61 * omega, 0.29 * b))?),
        ];
        for (check, residual) in checks {
            if !(residual <= NORMALIZATION_TOL) {
                return Err(Error::Construction {
                    check,
                    residual,
                    tolerance: NORMALIZATION_TOL,
                });
            }
        }
        Ok(bf)
    }

    /// `|Σ zeros − Σ poles|`; exactly zero for this placement.
    pub fn abel_residual(&self) -> f64 {
        let s: Complex = self.zeros.iter().sum::<Complex>() - self.poles.iter().sum::<Complex>();
        s.norm()
    }

    /// Logarithm of the unnormalized σ quotient.
    fn ln_quotient(&self, z: Complex) -> Complex {
        let l = &self.lat;
        l.ln_sigma(z - self.zeros[0]) + l.ln_sigma(z - self.zeros[1])
            - l.ln_sigma(z - self.poles[0])
            - l.ln_sigma(z - self.poles[1])
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        for p in self.poles {
            let d = self.lat.distance_to_lattice(z - p);
            if d < POLE_GUARD {
                return Err(Error::PoleProximity {
                    z,
                    pole: z - self.lat.reduce(z - p).z0,
                    distance: d,
                });
            }
        }
        let q = self.ln_quotient(z);
        if q.re == f64::NEG_INFINITY {
            return Ok(c64(0.0, 0.0));
        }
        Ok(self.kappa * q.exp())
    }

    /// `|B(z̄)·conj(B(z)) − 1|`.
    pub fn conjugation_residual(&self, z: Complex) -> Result<f64> {
        Ok((self.eval(z.conj())? * self.eval(z)?.conj() - 1.0).norm())
    }

    /// `|B(z + 2ω) + B(z)|`.
    pub fn half_period_residual(&self, z: Complex) -> Result<f64> {
        let shift = self.lat.half_period_real;
        Ok((self.eval(z + shift)? + self.eval(z)?).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_and_landmarks() {
        let bf = BFactor::build(1.0, 2.0).unwrap();
        let at = |x: f64| bf.eval(c64(x, 0.0)).unwrap();
        assert!((at(1.0) - I).norm() < 1e-12);
        assert!((at(0.0) + 1.0).norm() < 1e-10);
        assert!((at(2.0) - 1.0).norm() < 1e-10);
        assert!((at(3.0) + I).norm() < 1e-10);
        assert_eq!(bf.abel_residual(), 0.0);
    }

    #[test]
    fn zeros_and_poles() {
        let bf = BFactor::build(1.0, 1.5).unwrap();
        assert!(bf.eval(bf.zeros[0]).unwrap().norm() < 1e-10);
        assert!(bf.eval(bf.poles[0] + 1e-8).unwrap().norm() > 1e6);
        assert!(bf.eval(bf.poles[1]).is_err());
    }

    #[test]
    fn antiperiodic_in_half_period() {
        let bf = BFactor::build(1.0, 2.0).unwrap();
        for z in [c64(0.3, 0.2), c64(1.7, 1.1), c64(-2.2, 3.3)] {
            assert!(bf.half_period_residual(z).unwrap() < 1e-10);
        }
    }
}
