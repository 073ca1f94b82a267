//! The verification battery and its JSON report.
//!
//! Every check in [`REGISTRY`] produces exactly one [`CheckRecord`]. Checks that
//! do not apply to a domain type (the univalence claims for Type II, the flow
//! checks for Type I) and checks that need the unit normalization are still
//! reported, with `skipped` set to the reason. Each check draws its random
//! samples from its own ChaCha stream seeded by the run seed and the check
//! name.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::Lattice;
use crate::flow::{circulation_and_far_field, div_curl, velocity};
use crate::mapping::{
    check_claims, ConstructedMap, DomainKind, DomainSpec, Normalization, CROSS_FORM_TOL,
};
use crate::quad::{fixed_k15, integrate_path, k15_nodes, k15_weights, QuadOptions};
use crate::{c64, Complex, Error, Result, I};

pub const SCHEMA_VERSION: u32 = 1;

/// Names of all checks, in report order.
pub const REGISTRY: &[&str] = &[
    "elliptic.differential_equation",
    "elliptic.legendre",
    "elliptic.sigma_quasi_periodicity",
    "elliptic.periodicity",
    "elliptic.parity",
    "elliptic.conjugation",
    "roof.critical_points",
    "roof.pole_condition",
    "roof.cauchy_riemann",
    "roof.boundary_constancy",
    "roof.positivity",
    "roof.distinct_constants",
    "roof.period_purity",
    "roof.log_pole",
    "blaschke.unimodular_real",
    "blaschke.unimodular_top",
    "blaschke.half_period",
    "blaschke.conjugation",
    "blaschke.abel",
    "blaschke.pole_census",
    "mapping.cross_form",
    "mapping.zero_free",
    "mapping.zero_period",
    "mapping.zero_period_control",
    "mapping.topology",
    "mapping.closure",
    "mapping.self_intersection",
    "mapping.mirror_symmetry",
    "mapping.claim_1",
    "mapping.claim_2",
    "mapping.claim_3",
    "mapping.claim_4",
    "mapping.claim_5",
    "mapping.claim_6",
    "neumann.boundary",
    "gradient.interior_bound",
    "gradient.exterior_disk",
    "null_quadrature.g0",
    "null_quadrature.g1",
    "null_quadrature.g2",
    "null_quadrature.g3",
    "count.zeros",
    "count.poles",
    "count.total",
    "count.negative_control",
    "flow.circulation_sign",
    "flow.circulation_total",
    "flow.circulation_perimeter",
    "flow.far_field",
    "flow.speed",
    "flow.div_curl",
];

/// How `residual` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// Passes when `residual ≤ tolerance`.
    AtMost,
    /// Passes when `residual > tolerance`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub property: String,
    pub residual: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    pub samples: usize,
    pub skipped: Option<String>,
}

impl CheckRecord {
    fn new(name: &str, property: impl Into<String>, residual: f64, tolerance: f64, relation: Relation, samples: usize) -> Self {
        let pass = match relation {
            Relation::AtMost => residual <= tolerance,
            Relation::Above => residual > tolerance,
        };
        CheckRecord {
            name: name.to_string(),
            property: property.into(),
            residual,
            tolerance,
            relation,
            pass,
            samples,
            skipped: None,
        }
    }

    fn at_most(name: &str, property: impl Into<String>, residual: f64, tolerance: f64, samples: usize) -> Self {
        Self::new(name, property, residual, tolerance, Relation::AtMost, samples)
    }

    fn skip(name: &str, reason: impl Into<String>) -> Self {
        CheckRecord {
            name: name.to_string(),
            property: String::new(),
            residual: 0.0,
            tolerance: 0.0,
            relation: Relation::AtMost,
            pass: true,
            samples: 0,
            skipped: Some(reason.into()),
        }
    }

    fn failed(name: &str, err: &Error) -> Self {
        CheckRecord {
            name: name.to_string(),
            property: format!("evaluation failed: {err}"),
            residual: f64::NAN,
            tolerance: 0.0,
            relation: Relation::AtMost,
            pass: false,
            samples: 0,
            skipped: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub samples_per_side: usize,
    pub grid: usize,
    pub random_samples: usize,
    pub null_quadrature_panels: [usize; 2],
    pub base_point: Complex,
    pub f_anchor: &'static str,
    pub warnings: Vec<String>,
    pub injected_error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub spec: Option<DomainSpec>,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random points per kernel lattice.
    pub kernel_points: usize,
    /// Random points per B-factor law and for the Cauchy–Riemann proxy.
    pub random_samples: usize,
    /// Side of the interior sample grid.
    pub grid: usize,
    /// Number of zero-period heights.
    pub heights: usize,
    pub null_panels: [usize; 2],
    /// Multiply `F` by `1.001` before checking; a negative control for the exit status.
    pub inject_error: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            kernel_points: 1000,
            random_samples: 500,
            grid: 100,
            heights: 10,
            null_panels: [128, 256],
            inject_error: false,
        }
    }
}

fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    let h = name
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

// ---------------------------------------------------------------------------
// Elliptic kernel

/// Random point of the centred cell of `lat` at least `margin` from the lattice.
fn cell_point(rng: &mut ChaCha8Rng, lat: &Lattice, margin: f64) -> Complex {
    loop {
        let z = c64(
            rng.gen_range(-1.0..1.0) * lat.half_period_real,
            rng.gen_range(-1.0..1.0) * lat.half_period_imag,
        );
        if z.norm() > margin {
            return z;
        }
    }
}

fn kernel_lattices(spec: Option<&DomainSpec>) -> Result<Vec<Lattice>> {
    let (om, b) = spec.map_or((1.0, 2.0), |s| (s.omega, s.omega_prime_imag));
    Ok(vec![
        Lattice::build(om, b, crate::LatticeKind::Roof)?,
        Lattice::build(om, b, crate::LatticeKind::B)?,
        Lattice::rectangular(1.0, 1.0)?,
    ])
}

fn kernel_checks(spec: Option<&DomainSpec>, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let lats = match kernel_lattices(spec) {
        Ok(l) => l,
        Err(e) => return REGISTRY[..6].iter().map(|n| CheckRecord::failed(n, &e)).collect(),
    };
    let n = opts.kernel_points;
    let total = n * lats.len();
    let run = |name: &str, f: &dyn Fn(&Lattice, Complex) -> Result<f64>| -> Result<f64> {
        let mut rng = rng_for(opts.seed, name);
        let mut worst: f64 = 0.0;
        for lat in &lats {
            let margin = 0.05 * lat.half_period_real.min(lat.half_period_imag);
            for _ in 0..n {
                worst = worst.max(f(lat, cell_point(&mut rng, lat, margin))?);
            }
        }
        Ok(worst)
    };
    let record = |name: &str, prop: &str, tol: f64, samples: usize, r: Result<f64>| match r {
        Ok(res) => CheckRecord::at_most(name, prop, res, tol, samples),
        Err(e) => CheckRecord::failed(name, &e),
    };
    let mut out = Vec::new();
    out.push(record(
        "elliptic.differential_equation",
        "|℘′² − (4℘³ − g₂℘ − g₃)| / (1 + |℘|³)",
        1e-9,
        total,
        run("elliptic.differential_equation", &|l, z| {
            let p = l.wp(z)?;
            let d = l.wp_prime(z)?;
            Ok((d * d - (p * p * p * 4.0 - l.g2 * p - l.g3)).norm() / (1.0 + p.norm().powi(3)))
        }),
    ));
    out.push(record(
        "elliptic.legendre",
        "|η₁ω₃ − η₃ω₁ − iπ/2|",
        1e-12,
        lats.len(),
        Ok(max_of(lats.iter().map(|l| l.legendre_residual().norm()))),
    ));
    out.push(record(
        "elliptic.sigma_quasi_periodicity",
        "|σ(z + 2ωⱼ) / (−σ(z) exp(2ηⱼ(z + ωⱼ))) − 1|",
        1e-9,
        total,
        run("elliptic.sigma_quasi_periodicity", &|l, z| {
            let mut worst: f64 = 0.0;
            for (w, eta) in [(l.omega1(), l.eta1), (l.omega3(), l.eta3)] {
                let lhs = l.ln_sigma(z + w * 2.0);
                let rhs = l.ln_sigma(z) + eta * 2.0 * (z + w) + I * PI;
                worst = worst.max(((lhs - rhs).exp() - 1.0).norm());
            }
            Ok(worst)
        }),
    ));
    out.push(record(
        "elliptic.periodicity",
        "|℘(z + g) − ℘(z)| / (1 + |℘(z)|) for both generators",
        1e-10,
        total,
        run("elliptic.periodicity", &|l, z| {
            let p = l.wp(z)?;
            let [g1, g2] = l.generators();
            Ok(((l.wp(z + g1)? - p).norm()).max((l.wp(z + g2)? - p).norm()) / (1.0 + p.norm()))
        }),
    ));
    out.push(record(
        "elliptic.parity",
        "℘ even, ℘′ and σ odd (relative)",
        1e-12,
        total,
        run("elliptic.parity", &|l, z| {
            let rel = |a: Complex, b: Complex| (a - b).norm() / (1.0 + b.norm());
            Ok(rel(l.wp(-z)?, l.wp(z)?)
                .max(rel(l.wp_prime(-z)?, -l.wp_prime(z)?))
                .max(rel(l.sigma(-z), -l.sigma(z))))
        }),
    ));
    out.push(record(
        "elliptic.conjugation",
        "℘(z̄) = conj ℘(z), σ(z̄) = conj σ(z) (relative)",
        1e-10,
        total,
        run("elliptic.conjugation", &|l, z| {
            let rel = |a: Complex, b: Complex| (a - b).norm() / (1.0 + b.norm());
            Ok(rel(l.wp(z.conj())?, l.wp(z)?.conj()).max(rel(l.sigma(z.conj()), l.sigma(z).conj())))
        }),
    ));
    out
}

/// Runs only the elliptic kernel identities on the default lattices.
pub fn kernel_selftest(seed: u64) -> VerificationReport {
    let opts = VerifyOptions {
        seed,
        ..VerifyOptions::default()
    };
    let checks = kernel_checks(None, &opts);
    VerificationReport {
        schema: SCHEMA_VERSION,
        spec: None,
        pass: checks.iter().all(|c| c.pass),
        checks,
        provenance: Provenance {
            seed,
            samples_per_side: 0,
            grid: 0,
            random_samples: opts.kernel_points,
            null_quadrature_panels: [0, 0],
            base_point: c64(0.0, 0.0),
            f_anchor: "",
            warnings: Vec::new(),
            injected_error: false,
        },
    }
}

// ---------------------------------------------------------------------------
// Shared helpers

/// Interior grid points `((i + ½)/n · 4ω, (j + ½)/n · b)`.
fn interior_grid(cm: &ConstructedMap, n: usize) -> Vec<Complex> {
    let (w, b) = (cm.period_width(), cm.height());
    (0..n)
        .flat_map(|i| (0..n).map(move |j| c64(w * (i as f64 + 0.5) / n as f64, b * (j as f64 + 0.5) / n as f64)))
        .collect()
}

fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Complex> {
    vec![c64(x0, y0), c64(x1, y0), c64(x1, y1), c64(x0, y1), c64(x0, y0)]
}

fn polygon_circle(centre: Complex, r: f64, n: usize) -> Vec<Complex> {
    (0..=n).map(|k| centre + Complex::from_polar(r, TAU * (k % n) as f64 / n as f64)).collect()
}

/// `(1/2πi) ∮ g′/g dz` along a closed polygon.
fn log_winding(dlog: &(dyn Fn(Complex) -> Result<Complex> + Sync), contour: &[Complex]) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    };
    let total = integrate_path(&|z| dlog(z), contour, &opts)?;
    let turns = total / (I * TAU);
    Ok(turns.re + turns.im.abs())
}

fn winding_record(name: &str, property: &str, value: Result<f64>, expected: i64) -> CheckRecord {
    match value {
        Ok(w) => {
            let off = (w - w.round()).abs();
            let mut r = CheckRecord::at_most(
                name,
                format!("{property}: winding {w:.6}, expected {expected}"),
                off.max((w.round() - expected as f64).abs()),
                0.01,
                1,
            );
            if off > 0.01 {
                r.property = format!(
                    "{property}: {}",
                    Error::NonIntegerWinding { value: w, tolerance: 0.01 }
                );
            }
            r
        }
        Err(e) => CheckRecord::failed(name, &e),
    }
}

// ---------------------------------------------------------------------------
// Roof checks

fn roof_checks(cm: &ConstructedMap, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let roof = &cm.roof;
    let (om, b) = (cm.omega(), cm.height());
    let mut out = Vec::new();

    out.push(match roof.critical_points().iter().map(|w| roof.v_z(*w).map(|v| v.norm())).collect::<Result<Vec<_>>>() {
        Ok(v) => CheckRecord::at_most("roof.critical_points", "|v_z| at ω + ib/2 and 3ω + ib/2", max_of(v), 1e-10, 2),
        Err(e) => CheckRecord::failed("roof.critical_points", &e),
    });

    out.push(match roof.pole_condition_residual() {
        Some(r) => CheckRecord::at_most("roof.pole_condition", "|1 + c℘(iε)|", r, 1e-10, 1),
        None => CheckRecord::skip("roof.pole_condition", "Type I has no interior poles"),
    });

    let cr = {
        let mut rng = rng_for(opts.seed, "roof.cauchy_riemann");
        let h = 1e-5;
        let pts: Vec<Complex> = (0..opts.random_samples)
            .map(|_| c64(rng.gen_range(0.05..0.95) * 4.0 * om, rng.gen_range(0.05..0.95) * b))
            .collect();
        pts.iter()
            .map(|&z| {
                let gx = (roof.v_z(z + h)? - roof.v_z(z - h)?) / (2.0 * h);
                let gy = (roof.v_z(z + I * h)? - roof.v_z(z - I * h)?) / (2.0 * h);
                Ok((gx + I * gy).norm() / (gx.norm() + 1.0))
            })
            .collect::<Result<Vec<f64>>>()
            .map(max_of)
    };
    out.push(match cr {
        Ok(r) => CheckRecord::at_most("roof.cauchy_riemann", "|∂v_z/∂z̄| / (|∂v_z/∂z| + 1) by central differences", r, 1e-6, opts.random_samples),
        Err(e) => CheckRecord::failed("roof.cauchy_riemann", &e),
    });

    let bc = roof.boundary_constants;
    let consts = (1..20)
        .flat_map(|k| {
            let x = 2.0 * om * k as f64 / 20.0;
            [(c64(x, 0.0), bc.bottom), (c64(x, b), bc.top)]
        })
        .map(|(z, c)| roof.v_value(z).map(|v| (v - c).abs()))
        .collect::<Result<Vec<_>>>();
    out.push(match consts {
        Ok(v) => CheckRecord::at_most("roof.boundary_constancy", "|v − c| on both horizontal sides", max_of(v), 1e-8, 38),
        Err(e) => CheckRecord::failed("roof.boundary_constancy", &e),
    });

    let n = opts.grid;
    let xs: Vec<f64> = (0..n).map(|i| 4.0 * om * (i as f64 + 0.5) / n as f64).collect();
    let ys: Vec<f64> = (0..n).map(|j| b * (j as f64 + 0.5) / n as f64).collect();
    out.push(match roof.v_on_grid(&xs, &ys) {
        Ok(g) => {
            let min = g.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            let mut r = CheckRecord::new("roof.positivity", "min v over the interior grid", min, 0.0, Relation::Above, n * n);
            if !(bc.bottom >= 0.0 && bc.top >= 0.0) {
                r.pass = false;
            }
            r
        }
        Err(e) => CheckRecord::failed("roof.positivity", &e),
    });

    out.push(CheckRecord::new(
        "roof.distinct_constants",
        format!("|c_top − c_bottom| (constants {:.9}, {:.9})", bc.bottom, bc.top),
        (bc.top - bc.bottom).abs(),
        1e-6,
        Relation::Above,
        2,
    ));

    let vz = |z: Complex| roof.v_z(z);
    let qo = QuadOptions::default();
    let purity = (|| -> Result<f64> {
        let mut loops = vec![rectangle(om / 2.0, 3.0 * om / 2.0, b / 4.0, 3.0 * b / 4.0)];
        if let Some(e) = roof.epsilon {
            loops.push(rectangle(-om / 2.0, om / 2.0, e / 2.0, (e + b / 2.0) / 2.0));
        }
        let mut worst: f64 = 0.0;
        for l in &loops {
            worst = worst.max(integrate_path(&vz, l, &qo)?.re.abs());
        }
        for y in [b / 3.0, 2.0 * b / 3.0] {
            worst = worst.max(integrate_path(&vz, &[c64(0.0, y), c64(2.0 * om, y)], &qo)?.re.abs());
        }
        Ok(worst)
    })();
    out.push(match purity {
        Ok(r) => CheckRecord::at_most("roof.period_purity", "|Re ∮ v_z dz| over closed and horizontal-period cycles", r, 1e-8, 4),
        Err(e) => CheckRecord::failed("roof.period_purity", &e),
    });

    out.push(match (roof.epsilon, roof.residue()) {
        (Some(e), Some(res)) => {
            let fit = (|| -> Result<f64> {
                let dir = Complex::from_polar(1.0, 0.7);
                let r1 = 1e-2 * e;
                let r2 = 1e-4 * e;
                let v1 = roof.v_value(c64(0.0, e) + dir * r1 + 4.0 * om)?;
                let v2 = roof.v_value(c64(0.0, e) + dir * r2 + 4.0 * om)?;
                Ok((v2 - v1) / (r1.ln() - r2.ln()))
            })();
            match fit {
                Ok(a) => {
                    let expected = -2.0 * res;
                    let mut r = CheckRecord::at_most(
                        "roof.log_pole",
                        format!("fitted log coefficient {a:.6} against −2·Res(v_z, iε) = {expected:.6} (relative)"),
                        ((a - expected) / expected).abs(),
                        0.05,
                        2,
                    );
                    r.pass &= a > 0.0;
                    r
                }
                Err(e) => CheckRecord::failed("roof.log_pole", &e),
            }
        }
        _ => CheckRecord::skip("roof.log_pole", "Type I has no logarithmic poles"),
    });
    out
}

// ---------------------------------------------------------------------------
// B factor

fn blaschke_checks(cm: &ConstructedMap, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let bf = &cm.bfac;
    let (om, b) = (cm.omega(), cm.height());
    let n = opts.random_samples;
    let law = |name: &str, prop: &str, f: &dyn Fn(&mut ChaCha8Rng) -> Result<f64>| {
        let mut rng = rng_for(opts.seed, name);
        match (0..n).map(|_| f(&mut rng)).collect::<Result<Vec<_>>>() {
            Ok(v) => CheckRecord::at_most(name, prop, max_of(v), 1e-9, n),
            Err(e) => CheckRecord::failed(name, &e),
        }
    };
    let interior = |rng: &mut ChaCha8Rng| c64(rng.gen_range(-4.0..4.0) * om, rng.gen_range(-1.0..1.0) * b);
    let mut out = vec![
        law("blaschke.unimodular_real", "||B(x)| − 1| on the real axis", &|rng| {
            Ok((bf.eval(c64(rng.gen_range(-8.0..8.0) * om, 0.0))?.norm() - 1.0).abs())
        }),
        law("blaschke.unimodular_top", "||B(x + ib)| − 1| on the top side", &|rng| {
            Ok((bf.eval(c64(rng.gen_range(-8.0..8.0) * om, b))?.norm() - 1.0).abs())
        }),
        law("blaschke.half_period", "|B(z + 2ω) + B(z)| / (1 + |B(z)|)", &|rng| {
            let z = interior(rng);
            Ok(bf.half_period_residual(z)? / (1.0 + bf.eval(z)?.norm()))
        }),
        law("blaschke.conjugation", "|B(z̄)·conj B(z) − 1|", &|rng| bf.conjugation_residual(interior(rng))),
        CheckRecord::at_most("blaschke.abel", "|Σ zeros − Σ poles|", bf.abel_residual(), 1e-12, 1),
    ];

    let lat = &bf.lat;
    let dlog = |z: Complex| -> Result<Complex> {
        let mut s = c64(0.0, 0.0);
        for zz in bf.zeros {
            s += lat.zeta(z - zz)?;
        }
        for p in bf.poles {
            s -= lat.zeta(z - p)?;
        }
        Ok(s)
    };
    let census = (|| -> Result<(f64, f64)> {
        let whole = log_winding(&dlog, &rectangle(om / 2.0, 9.0 * om / 2.0, -0.75 * b, 1.25 * b))?;
        let mut worst: f64 = 0.0;
        for p in bf.poles {
            let w = log_winding(&dlog, &polygon_circle(p, 0.2 * om.min(b), 32))?;
            worst = worst.max((w + 1.0).abs());
        }
        Ok((whole, worst))
    })();
    out.push(match census {
        Ok((whole, worst)) => CheckRecord::at_most(
            "blaschke.pole_census",
            format!("winding over a period rectangle {whole:.6} (expected 0), −1 around each pole"),
            whole.abs().max(worst),
            0.01,
            3,
        ),
        Err(e) => CheckRecord::failed("blaschke.pole_census", &e),
    });
    out
}

// ---------------------------------------------------------------------------
// Mapping

fn mapping_checks(cm: &ConstructedMap, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let (om, b) = (cm.omega(), cm.height());
    let mut out = Vec::new();

    let probes = {
        let mut rng = rng_for(opts.seed, "mapping.cross_form");
        let mut pts = Vec::new();
        while pts.len() < 100 {
            let z = c64(rng.gen_range(0.02..0.98) * 4.0 * om, rng.gen_range(0.05..0.95) * b);
            let far = cm.roof.critical_points().iter().all(|w| (z - w).norm() > 0.02 * b)
                && cm.singular_points().iter().all(|p| (z - p).norm() > 0.02 * b);
            if far {
                pts.push(z);
            }
        }
        pts
    };
    out.push(match cm.cross_form_spread(&probes) {
        Ok(s) => CheckRecord::at_most("mapping.cross_form", "relative spread of F_σ / (v_z B)", s, CROSS_FORM_TOL, probes.len()),
        Err(e) => CheckRecord::failed("mapping.cross_form", &e),
    });

    let grid = interior_grid(cm, opts.grid);
    out.push(match grid.par_iter().map(|z| cm.f_prime(*z).map(|f| f.norm())).collect::<Result<Vec<_>>>() {
        Ok(v) => {
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            CheckRecord::new("mapping.zero_free", "min |F| over the interior grid", min, 0.0, Relation::Above, v.len())
        }
        Err(e) => CheckRecord::failed("mapping.zero_free", &e),
    });

    let heights: Vec<f64> = (0..opts.heights)
        .map(|k| b * (k as f64 + 0.5) / opts.heights as f64)
        .map(|y| match cm.roof.epsilon {
            Some(e) if (y - e).abs() < 0.02 * b => y + 0.03 * b,
            _ => y,
        })
        .collect();
    let zp = heights.iter().map(|y| cm.zero_period_check(*y)).collect::<Result<Vec<_>>>();
    out.push(match &zp {
        Ok(v) => CheckRecord::at_most(
            "mapping.zero_period",
            "max over heights of |∫₀^{4ω} F(x + iy) dx| / (4ω · max|F|)",
            max_of(v.iter().map(|z| z.residual / (z.tolerance / crate::mapping::ZERO_PERIOD_REL_TOL))),
            crate::mapping::ZERO_PERIOD_REL_TOL,
            v.len(),
        ),
        Err(e) => CheckRecord::failed("mapping.zero_period", e),
    });
    out.push(match cm.zero_period_perturbed(heights[heights.len() / 2], 0.01) {
        Ok(z) => CheckRecord::new(
            "mapping.zero_period_control",
            "perturbed integrand F·(1 + 0.01 sin(πx/2ω)) exceeds the tolerance (ratio residual/tolerance)",
            z.residual / z.tolerance,
            1e3,
            Relation::Above,
            1,
        ),
        Err(e) => CheckRecord::failed("mapping.zero_period_control", &e),
    });

    let trace = cm.trace_raw(cm.spec.samples_per_side);
    match &trace {
        Ok(t) => {
            let topo = t.topology();
            let (expected, desc) = match cm.kind() {
                DomainKind::TypeII => ((2, 0), "2 closed bubbles per period"),
                DomainKind::TypeI => ((1, 2), "1 closed curve and 2 unbounded arcs"),
            };
            let mismatch = (topo.closed_curves != expected.0 || topo.unbounded_arcs != expected.1 || topo.other_open != 0) as u8;
            out.push(CheckRecord::at_most(
                "mapping.topology",
                format!("{desc}; found {} closed, {} unbounded, {} other", topo.closed_curves, topo.unbounded_arcs, topo.other_open),
                mismatch as f64,
                0.0,
                t.curves.len(),
            ));
            let gaps = t
                .curves
                .iter()
                .filter(|c| c.closed || matches!(c.label, crate::mapping::CurveLabel::Bubble(_) | crate::mapping::CurveLabel::TopClosed))
                .map(|c| (c.points[c.points.len() - 1] - c.points[0]).norm() / crate::geometry::diameter(&c.points));
            out.push(CheckRecord::at_most(
                "mapping.closure",
                "end-point gap of closed images relative to their diameter",
                max_of(gaps),
                crate::mapping::CLOSURE_TOL,
                t.curves.len(),
            ));
            let hits = t.crossings();
            out.push(CheckRecord::at_most(
                "mapping.self_intersection",
                "segment crossings among boundary images (with period translates)",
                hits.len() as f64,
                0.0,
                t.curves.iter().map(|c| c.points.len()).sum(),
            ));
            out.push(match t.mirror_residual() {
                Some(r) => CheckRecord::at_most("mapping.mirror_symmetry", "aligned bubbles symmetric about a vertical axis (relative)", r, 1e-6, t.samples_per_side),
                None => CheckRecord::skip("mapping.mirror_symmetry", "Type I traces are not periodic rows"),
            });
        }
        Err(e) => {
            for n in ["mapping.topology", "mapping.closure", "mapping.self_intersection", "mapping.mirror_symmetry"] {
                out.push(CheckRecord::failed(n, e));
            }
        }
    }

    match cm.kind() {
        DomainKind::TypeI => match check_claims(cm, cm.spec.samples_per_side) {
            Ok(claims) => {
                for c in claims {
                    out.push(CheckRecord::new(
                        &format!("mapping.claim_{}", c.claim),
                        c.statement,
                        c.margin,
                        0.0,
                        Relation::Above,
                        cm.spec.samples_per_side,
                    ));
                }
            }
            Err(e) => {
                for k in 1..=6 {
                    out.push(CheckRecord::failed(&format!("mapping.claim_{k}"), &e));
                }
            }
        },
        DomainKind::TypeII => {
            for k in 1..=6 {
                out.push(CheckRecord::skip(&format!("mapping.claim_{k}"), "the univalence claims concern Type I"));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Neumann data and gradient bounds

fn neumann_checks(cm: &ConstructedMap, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let (w, b) = (cm.period_width(), cm.height());
    let n = cm.spec.samples_per_side;
    let unit = cm.spec.normalization == Normalization::NeumannUnit;
    let side: Vec<Complex> = (0..n)
        .flat_map(|k| {
            let x = w * (k as f64 + 0.5) / n as f64;
            [c64(x, 0.0), c64(x, b)]
        })
        .collect();
    let grid = interior_grid(cm, opts.grid);
    let mut out = Vec::new();
    if unit {
        out.push(match side.par_iter().map(|z| cm.gradient_magnitude(*z).map(|g| (g - 1.0).abs())).collect::<Result<Vec<_>>>() {
            Ok(v) => CheckRecord::at_most("neumann.boundary", "||2 v_z / F| − 1| on both horizontal sides", max_of(v), 1e-8, side.len()),
            Err(e) => CheckRecord::failed("neumann.boundary", &e),
        });
        out.push(match grid.par_iter().map(|z| cm.gradient_magnitude(*z)).collect::<Result<Vec<_>>>() {
            Ok(v) => CheckRecord::at_most("gradient.interior_bound", "sup |2 v_z / F| over the interior grid", max_of(v.iter().copied()), 2.0 + 1e-6, v.len()),
            Err(e) => CheckRecord::failed("gradient.interior_bound", &e),
        });
    } else {
        out.push(CheckRecord::skip("neumann.boundary", "needs the unit normalization"));
        out.push(CheckRecord::skip("gradient.interior_bound", "needs the unit normalization"));
    }
    out.push(match grid.par_iter().map(|z| cm.bfac.eval(*z).map(|v| 1.0 / v.norm())).collect::<Result<Vec<_>>>() {
        Ok(v) => CheckRecord::at_most("gradient.exterior_disk", "sup 1/|B| over the interior grid", max_of(v.iter().copied()), 1.0 + 1e-6, v.len()),
        Err(e) => CheckRecord::failed("gradient.exterior_disk", &e),
    });
    out
}

// ---------------------------------------------------------------------------
// Null quadrature

/// `∮ g(f(z)) F(z) dz` along a closed side, by fixed 15-point panels with `f`
/// at the nodes obtained from sub-integrals within each panel. Returns the
/// integral and the scale `len · max|g∘f| · max|F|`.
pub fn null_quadrature(cm: &ConstructedMap, y: f64, panels: usize, power: i32) -> Result<(Complex, f64)> {
    let width = cm.period_width();
    let xs: Vec<f64> = (0..=panels).map(|k| width * k as f64 / panels as f64).collect();
    let f_start = cm.side_values(y, &xs, 0, cm.f_eval(c64(0.0, y))?)?;
    let weights = k15_weights();
    let fp = |z: Complex| cm.f_prime(z);
    let parts: Vec<(Complex, f64, f64)> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let a = c64(xs[k], y);
            let bb = c64(xs[k + 1], y);
            let half = (bb - a) * 0.5;
            let mut sum = c64(0.0, 0.0);
            let (mut gmax, mut fmax): (f64, f64) = (0.0, 0.0);
            for (node, wgt) in k15_nodes(a, bb).into_iter().zip(weights) {
                let fz = f_start[k] + fixed_k15(&fp, a, node)?;
                let g = fz.powi(power);
                let fprime = cm.f_prime(node)?;
                sum += g * fprime * wgt;
                gmax = gmax.max(g.norm());
                fmax = fmax.max(fprime.norm());
            }
            Ok((sum * half, gmax, fmax))
        })
        .collect::<Result<_>>()?;
    let total: Complex = parts.iter().map(|p| p.0).sum();
    let gmax = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let fmax = parts.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok((total, width * gmax * fmax))
}

fn null_checks(cm: &ConstructedMap, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let heights: Vec<f64> = match cm.kind() {
        DomainKind::TypeII => vec![0.0, cm.height()],
        DomainKind::TypeI => vec![cm.height()],
    };
    (0..4)
        .map(|power| {
            let name = format!("null_quadrature.g{power}");
            let run = || -> Result<(f64, f64)> {
                let mut worst: f64 = 0.0;
                let mut disagreement: f64 = 0.0;
                for &y in &heights {
                    let (i1, s1) = null_quadrature(cm, y, opts.null_panels[0], power)?;
                    let (i2, s2) = null_quadrature(cm, y, opts.null_panels[1], power)?;
                    worst = worst.max(i1.norm() / s1).max(i2.norm() / s2);
                    disagreement = disagreement.max((i1 - i2).norm() / s2);
                }
                Ok((worst, disagreement))
            };
            match run() {
                Ok((worst, dis)) => CheckRecord::at_most(
                    &name,
                    format!(
                        "|∮ f^{power} F dz| / (len · max|f^{power}| · max|F|) over closed side contours; resolutions differ by {dis:.2e}"
                    ),
                    worst,
                    1e-7,
                    heights.len() * (opts.null_panels[0] + opts.null_panels[1]) * 15,
                ),
                Err(e) => CheckRecord::failed(&name, &e),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Pole and zero census of v_z

fn count_checks(cm: &ConstructedMap) -> Vec<CheckRecord> {
    let roof = &cm.roof;
    let (om, b) = (cm.omega(), cm.height());
    let dlog = |z: Complex| -> Result<Complex> { Ok(roof.v_zz(z)? / roof.v_z(z)?) };
    let mut out = Vec::new();
    match roof.epsilon {
        Some(e) => {
            let y_sep = (e + b / 2.0) / 2.0;
            out.push(winding_record(
                "count.zeros",
                "zeros of v_z in [ω/2, 9ω/2] × [y_sep, b]",
                log_winding(&dlog, &rectangle(om / 2.0, 4.5 * om, y_sep, b)),
                2,
            ));
            out.push(winding_record(
                "count.poles",
                "zeros minus poles of v_z in [ω/2, 9ω/2] × [0, y_sep]",
                log_winding(&dlog, &rectangle(om / 2.0, 4.5 * om, 0.0, y_sep)),
                -2,
            ));
            out.push(winding_record(
                "count.total",
                "zeros minus poles of v_z over one period of G",
                log_winding(&dlog, &rectangle(om / 2.0, 4.5 * om, 0.0, b)),
                0,
            ));
        }
        None => {
            out.push(winding_record(
                "count.zeros",
                "zeros of v_z in [ω/2, 9ω/2] × [b/4, b]",
                log_winding(&dlog, &rectangle(om / 2.0, 4.5 * om, b / 4.0, b)),
                2,
            ));
            let r = om.min(b) / 8.0;
            let circles = (|| -> Result<f64> {
                Ok(log_winding(&dlog, &polygon_circle(c64(0.0, 0.0), r, 48))?
                    + log_winding(&dlog, &polygon_circle(c64(2.0 * om, 0.0), r, 48))?)
            })();
            out.push(winding_record("count.poles", "two double poles of v_z on the bottom side", circles, -4));
            out.push(CheckRecord::skip("count.total", "the Type I poles lie on the boundary of G"));
        }
    }
    let empty = c64(om / 2.0, b / 2.0);
    out.push(winding_record(
        "count.negative_control",
        "disk free of zeros and poles",
        log_winding(&dlog, &polygon_circle(empty, 0.1 * om.min(b), 32)),
        0,
    ));
    out
}

// ---------------------------------------------------------------------------
// Flow

fn flow_checks(cm: &ConstructedMap, opts: &VerifyOptions) -> Vec<CheckRecord> {
    const NAMES: [&str; 6] = [
        "flow.circulation_sign",
        "flow.circulation_total",
        "flow.circulation_perimeter",
        "flow.far_field",
        "flow.speed",
        "flow.div_curl",
    ];
    if cm.kind() == DomainKind::TypeI {
        return NAMES.iter().map(|n| CheckRecord::skip(n, "the hollow-vortex row is a Type II picture")).collect();
    }
    let (circ, far) = match circulation_and_far_field(cm) {
        Ok(v) => v,
        Err(e) => return NAMES.iter().map(|n| CheckRecord::failed(n, &e)).collect(),
    };
    let unit = cm.spec.normalization == Normalization::NeumannUnit;
    let mut out = vec![
        CheckRecord::new(
            "flow.circulation_sign",
            format!("Γ_bottom·Γ_top > 0 (Γ = {:.6}, {:.6})", circ.bottom, circ.top),
            circ.bottom * circ.top,
            0.0,
            Relation::Above,
            2,
        ),
        CheckRecord::at_most(
            "flow.circulation_total",
            "|Γ_bottom + Γ_top − 8π Res(v_z, iε)| / |8π Res|",
            ((circ.bottom + circ.top - circ.residue_total) / circ.residue_total).abs(),
            1e-8,
            2,
        ),
    ];
    out.push(if unit {
        CheckRecord::at_most(
            "flow.circulation_perimeter",
            "||Γ| − bubble perimeter| / perimeter",
            max_of([0, 1].map(|k| {
                let g = [circ.bottom, circ.top][k];
                (g.abs() - circ.perimeters[k]).abs() / circ.perimeters[k]
            })),
            1e-4,
            2,
        )
    } else {
        CheckRecord::skip("flow.circulation_perimeter", "needs the unit normalization")
    });
    out.push(CheckRecord::new(
        "flow.far_field",
        format!("horizontal far-field velocities have opposite signs (above {:.6}, below {:.6})", far.above.re, far.below.re),
        -(far.above.re * far.below.re),
        0.0,
        Relation::Above,
        2,
    ));
    let (w, b) = (cm.period_width(), cm.height());
    let n = cm.spec.samples_per_side;
    out.push(if unit {
        let pts: Vec<Complex> = (0..n).flat_map(|k| {
            let x = w * (k as f64 + 0.25) / n as f64;
            [c64(x, 0.0), c64(x, b)]
        }).collect();
        match pts.par_iter().map(|z| velocity(cm, *z).map(|v| (v.norm() - 1.0).abs())).collect::<Result<Vec<_>>>() {
            Ok(v) => CheckRecord::at_most("flow.speed", "||V| − 1| on the bubble boundaries", max_of(v.iter().copied()), 1e-6, v.len()),
            Err(e) => CheckRecord::failed("flow.speed", &e),
        }
    } else {
        CheckRecord::skip("flow.speed", "needs the unit normalization")
    });
    let m = (opts.grid / 5).max(4);
    let pts: Vec<Complex> = interior_grid(cm, m)
        .into_iter()
        .filter(|z| cm.singular_points().iter().all(|p| (z - p).norm() > 0.1 * b))
        .collect();
    out.push(match pts.par_iter().map(|z| div_curl(cm, *z, 1e-4 * b).map(|d| d.div.abs().max(d.curl.abs()) / d.gradient)).collect::<Result<Vec<_>>>() {
        Ok(v) => CheckRecord::at_most("flow.div_curl", "max(|div V|, |curl V|) / |∇V| by finite differences", max_of(v.iter().copied()), 1e-4, v.len()),
        Err(e) => CheckRecord::failed("flow.div_curl", &e),
    });
    out
}

// ---------------------------------------------------------------------------

/// Builds the map for `spec` and runs the whole battery.
pub fn verify(spec: &DomainSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut cm = ConstructedMap::build(spec)?;
    if opts.inject_error {
        cm.perturb_scale(1.001);
    }
    Ok(verify_map(&cm, opts))
}

/// Runs the battery on an already built map.
pub fn verify_map(cm: &ConstructedMap, opts: &VerifyOptions) -> VerificationReport {
    type Group<'a> = Box<dyn Fn() -> Vec<CheckRecord> + Send + Sync + 'a>;
    let groups: Vec<Group> = vec![
        Box::new(|| kernel_checks(Some(&cm.spec), opts)),
        Box::new(|| roof_checks(cm, opts)),
        Box::new(|| blaschke_checks(cm, opts)),
        Box::new(|| mapping_checks(cm, opts)),
        Box::new(|| neumann_checks(cm, opts)),
        Box::new(|| null_checks(cm, opts)),
        Box::new(|| count_checks(cm)),
        Box::new(|| flow_checks(cm, opts)),
    ];
    let results: Vec<Vec<CheckRecord>> = groups.par_iter().map(|g| g()).collect();
    let mut checks: Vec<CheckRecord> = results.into_iter().flatten().collect();
    checks.sort_by_key(|c| REGISTRY.iter().position(|n| *n == c.name).unwrap_or(usize::MAX));
    VerificationReport {
        schema: SCHEMA_VERSION,
        spec: Some(cm.spec.clone()),
        pass: checks.iter().all(|c| c.pass),
        checks,
        provenance: Provenance {
            seed: opts.seed,
            samples_per_side: cm.spec.samples_per_side,
            grid: opts.grid,
            random_samples: opts.random_samples,
            null_quadrature_panels: opts.null_panels,
            base_point: cm.base,
            f_anchor: "f(ω + 3ib/4) = 0",
            warnings: cm.warnings.clone(),
            injected_error: opts.inject_error,
        },
    }
}
