//! Construction and verification of doubly connected (Type I) and periodic
//! two-bubble (Type II) quasi-exceptional domains.
//!
//! A quasi-exceptional domain carries a positive harmonic "roof" function that
//! is constant on every boundary component and has unit inward normal
//! derivative there. The domains built here are images of the rectangle
//! `G = [0, 4ω] × [0, Im ω′]` under `f = ∫ F`, where `F = λ · v_z · B` is the
//! product of the pulled-back roof derivative ([`roof`]) and an elliptic
//! factor that is unimodular on the horizontal sides ([`blaschke`]).
//!
//! Module map:
//!
//! * [`elliptic`]: Weierstrass ℘, ℘′, ζ, σ on rectangular lattices.
//! * [`quad`]: adaptive Gauss–Kronrod integration along complex segments.
//! * [`path`]: integration paths inside `G` that detour around singularities.
//! * [`roof`], [`blaschke`], [`mapping`]: the construction itself.
//! * [`geometry`]: polyline sweeps and winding numbers.
//! * [`verify`]: the property battery and its JSON report.
//! * [`flow`]: hollow-vortex post-processing (streamlines, circulation).

pub mod blaschke;
pub mod elliptic;
mod error;
pub mod flow;
pub mod geometry;
pub mod mapping;
pub mod path;
pub mod quad;
pub mod roof;
pub mod verify;

pub use num_complex::Complex64 as Complex;

pub use blaschke::BFactor;
pub use elliptic::{Lattice, LatticeKind};
pub use error::{Error, Result};
pub use mapping::{BoundaryTrace, ConstructedMap, DomainKind, DomainSpec, Normalization};
pub use roof::RoofField;
pub use verify::VerificationReport;

/// Shorthand for `Complex::new`.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// The imaginary unit.
pub const I: Complex = Complex::new(0.0, 1.0);
