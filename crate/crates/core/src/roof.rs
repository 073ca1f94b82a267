//! The pulled-back roof function `v` and its derivative `v_z = (v_x − i v_y)/2`.
//!
//! On the roof lattice (half-periods `ω` and `i·b`):
//!
//! * Type I: `v_z = −i(℘ − c₀)` with `c₀ = ℘(ω + ib/2)`.
//! * Type II: `v_z = −i℘/(1 + c℘) + ic₀` with `c = −1/℘(iε)` and
//!   `c₀ = ℘(w)/(1 + c℘(w))`, `w = ω + ib/2`.
//!
//! The roof itself is `v = 2 Re ∫ v_z dz + const`, integrated from a base point
//! along [`PathPlanner`] paths. The constant is fixed so that the smaller of
//! the two horizontal-side values is zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{Lattice, LatticeKind, POLE_GUARD};
use crate::path::PathPlanner;
use crate::quad::{integrate_path, integrate_segment, QuadOptions};
use crate::{c64, Complex, Error, Result, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    TypeI,
    TypeII,
}

/// Values of `v` on the two horizontal sides of the strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryConstants {
    pub bottom: f64,
    pub top: f64,
}

#[derive(Debug, Clone)]
pub struct RoofField {
    pub kind: DomainKind,
    pub lat: Lattice,
    pub c0: f64,
    /// The small constant `c` of the Type II field; zero for Type I.
    pub c_pole: f64,
    pub epsilon: Option<f64>,
    pub boundary_constants: BoundaryConstants,
    pub base_point: Complex,
    pub base_value: f64,
    planner: PathPlanner,
    quad: QuadOptions,
}

const CRITICAL_TOL: f64 = 1e-10;

impl RoofField {
    /// Builds the roof field on the lattice with half-periods `ω` and `i·b`.
    pub fn build(kind: DomainKind, omega: f64, b: f64, epsilon: Option<f64>) -> Result<Self> {
        let lat = Lattice::build(omega, b, LatticeKind::Roof)?;
        let w = c64(omega, b / 2.0);
        let (c_pole, c0, eps) = match kind {
            DomainKind::TypeI => (0.0, lat.wp(w)?.re, None),
            DomainKind::TypeII => {
                let eps = epsilon.ok_or_else(|| {
                    Error::InvalidParameter("a Type II domain needs the pole offset epsilon".into())
                })?;
                if !(eps > 0.0 && eps < b / 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "epsilon must lie in (0, Im ω′/2) = (0, {}), got {eps}",
                        b / 2.0
                    )));
                }
                let p_eps = lat.wp(c64(0.0, eps))?;
                if p_eps.norm() < 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "℘(iε) vanishes at epsilon = {eps}; the pole constant is undefined"
                    )));
                }
                let c = (-1.0 / p_eps).re;
                let pw = lat.wp(w)?;
                let c0 = (pw / (1.0 + pw * c)).re;
                let smallness = (pw * c).norm();
                if smallness >= 1.0 {
                    return Err(Error::Construction {
                        check: "pole constant small at critical points",
                        residual: smallness,
                        tolerance: 1.0,
                    });
                }
                (c, c0, Some(eps))
            }
        };
        let base_point = c64(omega, 0.75 * b);
        let (singular, radius) = match eps {
            None => (vec![c64(0.0, 0.0)], omega.min(b) / 4.0),
            Some(e) => (vec![c64(0.0, e)], (e / 2.0).min((b - e) / 2.0).min(omega / 2.0)),
        };
        let mut rf = RoofField {
            kind,
            lat,
            c0,
            c_pole,
            epsilon: eps,
            boundary_constants: BoundaryConstants { bottom: 0.0, top: 0.0 },
            base_point,
            base_value: 0.0,
            planner: PathPlanner::new(base_point, 2.0 * omega, singular, radius),
            quad: QuadOptions::default(),
        };
        for w in rf.critical_points() {
            let r = rf.v_z(w)?.norm();
            if r > CRITICAL_TOL {
                return Err(Error::Construction {
                    check: "critical point placement",
                    residual: r,
                    tolerance: CRITICAL_TOL,
                });
            }
        }
        if let Some(r) = rf.pole_condition_residual() {
            if r > CRITICAL_TOL {
                return Err(Error::Construction {
                    check: "1 + c℘(iε) = 0",
                    residual: r,
                    tolerance: CRITICAL_TOL,
                });
            }
        }
        let bottom = rf.v_value(c64(omega, 0.0))?;
        let top = rf.v_value(c64(omega, b))?;
        rf.base_value = -bottom.min(top);
        rf.boundary_constants = BoundaryConstants {
            bottom: bottom + rf.base_value,
            top: top + rf.base_value,
        };
        Ok(rf)
    }

    pub fn omega(&self) -> f64 {
        self.lat.half_period_real
    }

    pub fn height(&self) -> f64 {
        self.lat.half_period_imag
    }

    /// The two prescribed zeros `ω + ib/2` and `3ω + ib/2`.
    pub fn critical_points(&self) -> [Complex; 2] {
        let (om, b) = (self.omega(), self.height());
        [c64(om, b / 2.0), c64(3.0 * om, b / 2.0)]
    }

    /// Poles of `v_z` inside one period `[0, 2ω)` of the closed strip.
    pub fn poles(&self) -> Vec<Complex> {
        match self.epsilon {
            None => vec![c64(0.0, 0.0)],
            Some(e) => vec![c64(0.0, e)],
        }
    }

    /// `|1 + c℘(iε)|`, Type II only.
    pub fn pole_condition_residual(&self) -> Option<f64> {
        let e = self.epsilon?;
        let p = self.lat.wp(c64(0.0, e)).ok()?;
        Some((p * self.c_pole + 1.0).norm())
    }

    pub fn v_z(&self, z: Complex) -> Result<Complex> {
        match self.epsilon {
            None => Ok((self.lat.wp(z)? - self.c0) * -I),
            Some(e) => {
                for p in [c64(0.0, e), c64(0.0, -e)] {
                    let d = self.lat.distance_to_lattice(z - p);
                    if d < POLE_GUARD {
                        return Err(Error::PoleProximity {
                            z,
                            pole: z - self.lat.reduce(z - p).z0,
                            distance: d,
                        });
                    }
                }
                if self.lat.distance_to_lattice(z) < POLE_GUARD {
                    return Ok(I * (self.c0 - 1.0 / self.c_pole));
                }
                let w = self.lat.wp(z)?;
                Ok(-I * w / (w * self.c_pole + 1.0) + I * self.c0)
            }
        }
    }

    /// The derivative of [`RoofField::v_z`].
    pub fn v_zz(&self, z: Complex) -> Result<Complex> {
        match self.epsilon {
            None => Ok(self.lat.wp_prime(z)? * -I),
            Some(_) => {
                self.v_z(z)?;
                if self.lat.distance_to_lattice(z) < 1e-6 {
                    // ℘′/(1 + c℘)² = O(z³) at lattice points.
                    return Ok(c64(0.0, 0.0));
                }
                let w = self.lat.wp(z)?;
                let d = w * self.c_pole + 1.0;
                Ok(-I * self.lat.wp_prime(z)? / (d * d))
            }
        }
    }

    /// Residue of `v_z` at `iε` (real, negative). `None` for Type I.
    pub fn residue(&self) -> Option<f64> {
        let e = self.epsilon?;
        let d = self.lat.wp_prime(c64(0.0, e)).ok()?;
        Some((I / (d * self.c_pole * self.c_pole)).re)
    }

    /// The polygonal path used by [`RoofField::v_value`] for `z`.
    pub fn path_to(&self, z: Complex) -> Result<Vec<Complex>> {
        let z = self.reduce_into_strip(z)?;
        Ok(self.planner.plan(z))
    }

    fn reduce_into_strip(&self, z: Complex) -> Result<Complex> {
        let b = self.height();
        let tol = 1e-12 * b;
        if !(z.im >= -tol && z.im <= b + tol) {
            return Err(Error::InvalidParameter(format!(
                "{z} lies outside the strip 0 ≤ Im z ≤ {b}"
            )));
        }
        let period = 2.0 * self.omega();
        let x = z.re.rem_euclid(period);
        let z = c64(x, z.im.clamp(0.0, b));
        if self.epsilon.is_none() {
            let x_near = x.min(period - x);
            if z.im.abs() + x_near < 1e-12 * self.omega() {
                return Err(Error::SingularPoint(z));
            }
        }
        Ok(z)
    }

    /// `v(z)`, integrating `v_z` along the default planned path.
    pub fn v_value(&self, z: Complex) -> Result<f64> {
        let path = self.path_to(z)?;
        self.v_along(&path)
    }

    /// `v(z)` along a caller-supplied polyline from the base point to `z`.
    pub fn v_value_via(&self, path: &[Complex]) -> Result<f64> {
        match path.first() {
            Some(p) if (*p - self.base_point).norm() < 1e-12 => self.v_along(path),
            _ => Err(Error::InvalidParameter(
                "a path hint must start at the base point".into(),
            )),
        }
    }

    /// `v` on the tensor grid `xs × ys`, returned column by column. Each column
    /// is integrated upward from the bottom side, where `v` equals the bottom
    /// constant; `ys` must be ascending and non-negative.
    pub fn v_on_grid(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
        let f = |z: Complex| self.v_z(z);
        xs.par_iter()
            .map(|&x| {
                let mut v = self.boundary_constants.bottom;
                let mut prev = c64(x, 0.0);
                let mut col = Vec::with_capacity(ys.len());
                for &y in ys {
                    let z = c64(x, y);
                    v += 2.0 * integrate_segment(&f, prev, z, &self.quad)?.re;
                    col.push(v);
                    prev = z;
                }
                Ok(col)
            })
            .collect()
    }

    fn v_along(&self, path: &[Complex]) -> Result<f64> {
        let f = |z: Complex| self.v_z(z);
        let integral = integrate_path(&f, path, &self.quad)?;
        Ok(2.0 * integral.re + self.base_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_one_constants() {
        let rf = RoofField::build(DomainKind::TypeI, 1.0, 2.0, None).unwrap();
        assert!((rf.c0 - rf.lat.wp(c64(1.0, 1.0)).unwrap().re).abs() < 1e-15);
        assert!(rf.boundary_constants.bottom.min(rf.boundary_constants.top).abs() < 1e-14);
        assert!(rf.residue().is_none());
    }

    #[test]
    fn type_two_constants() {
        let rf = RoofField::build(DomainKind::TypeII, 1.0, 2.0, Some(0.5)).unwrap();
        assert!(rf.c_pole > 0.0);
        assert!(rf.pole_condition_residual().unwrap() < 1e-10);
        assert!(rf.residue().unwrap() < 0.0);
    }

    #[test]
    fn epsilon_range_is_enforced() {
        assert!(RoofField::build(DomainKind::TypeII, 1.0, 2.0, Some(1.0)).is_err());
        assert!(RoofField::build(DomainKind::TypeII, 1.0, 2.0, Some(0.0)).is_err());
        assert!(RoofField::build(DomainKind::TypeII, 1.0, 2.0, None).is_err());
    }

    #[test]
    fn double_pole_asymptotics() {
        let rf = RoofField::build(DomainKind::TypeI, 1.0, 2.0, None).unwrap();
        let z = c64(1e-4, 1e-4);
        let lead = rf.v_z(z).unwrap() * z * z;
        assert!((lead + I).norm() < 1e-7, "{lead}");
    }

    #[test]
    fn roof_is_zero_on_one_side() {
        let rf = RoofField::build(DomainKind::TypeII, 1.0, 1.5, Some(0.4)).unwrap();
        let bc = rf.boundary_constants;
        for x in [0.1, 0.9, 1.7] {
            assert!((rf.v_value(c64(x, 0.0)).unwrap() - bc.bottom).abs() < 1e-8);
            assert!((rf.v_value(c64(x, 1.5)).unwrap() - bc.top).abs() < 1e-8);
        }
        assert!(rf.v_value(c64(1.0, 0.75)).unwrap() > 0.0);
    }

    #[test]
    fn singular_corner_is_rejected() {
        let rf = RoofField::build(DomainKind::TypeI, 1.0, 2.0, None).unwrap();
        assert!(matches!(rf.v_value(c64(2.0, 0.0)), Err(Error::SingularPoint(_))));
        assert!(rf.v_value(c64(0.5, 2.5)).is_err());
    }
}
