//! Acceptance criteria 1–10, one PASS/FAIL line each. Every threshold is
//! stated in this file and compared with the raw residuals of the reports.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qed_core::quad::{integrate_path, QuadOptions};
use qed_core::verify::{kernel_selftest, verify_map, CheckRecord, VerificationReport, VerifyOptions};
use qed_core::{c64, Complex, ConstructedMap, DomainKind, DomainSpec, I};

struct Figure {
    name: &'static str,
    spec: DomainSpec,
    map: ConstructedMap,
    report: VerificationReport,
}

impl Figure {
    fn new(name: &'static str, spec: DomainSpec) -> Figure {
        let map = ConstructedMap::build(&spec).expect("figure spec builds");
        let report = verify_map(&map, &VerifyOptions::default());
        Figure { name, spec, map, report }
    }

    fn rec(&self, name: &str) -> &CheckRecord {
        self.report.get(name).unwrap_or_else(|| panic!("{}: no record {name}", self.name))
    }

    fn type_two(&self) -> bool {
        self.spec.kind == DomainKind::TypeII
    }
}

/// Collects the individual conditions of one criterion.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn at_most(&mut self, fig: &Figure, check: &str, limit: f64, min_samples: usize) {
        let r = fig.rec(check);
        self.require(
            r.skipped.is_none() && r.residual <= limit && r.samples >= min_samples,
            format!("{} {check}: residual {:e} (limit {limit:e}), samples {}", fig.name, r.residual, r.samples),
        );
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn winding(dlog: &(dyn Fn(Complex) -> qed_core::Result<Complex> + Sync), contour: &[Complex]) -> f64 {
    let opts = QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    };
    (integrate_path(&|z| dlog(z), contour, &opts).expect("winding integral converges") / (I * TAU)).re
}

fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Complex> {
    vec![c64(x0, y0), c64(x1, y0), c64(x1, y1), c64(x0, y1), c64(x0, y0)]
}

fn circle(c: Complex, r: f64) -> Vec<Complex> {
    (0..=64).map(|k| c + Complex::from_polar(r, TAU * (k % 64) as f64 / 64.0)).collect()
}

fn integer_near(w: f64, expected: f64) -> bool {
    (w - w.round()).abs() <= 0.01 && w.round() == expected
}

fn main() -> ExitCode {
    let t_kernel = Instant::now();
    let kernel = kernel_selftest(0);
    let kernel_time = t_kernel.elapsed();

    let (fig1, (fig2, fig3)) = rayon::join(
        || Figure::new("fig1", DomainSpec::fig1()),
        || rayon::join(|| Figure::new("fig2", DomainSpec::fig2()), || Figure::new("fig3", DomainSpec::fig3())),
    );
    let figures = [&fig1, &fig2, &fig3];
    let type_two = [&fig2, &fig3];

    let mut criteria: Vec<(u8, &str, Tally)> = Vec::new();

    // 1. Elliptic kernel suite.
    let mut t = Tally::default();
    let k = |name: &str| kernel.get(name).unwrap();
    let de = k("elliptic.differential_equation");
    t.require(de.residual < 1e-9 && de.samples >= 3000, format!("differential equation {:e} over {}", de.residual, de.samples));
    t.require(k("elliptic.legendre").residual < 1e-12, "Legendre relation");
    t.require(k("elliptic.sigma_quasi_periodicity").residual < 1e-9, "σ quasi-periodicity");
    t.require(kernel_time < Duration::from_secs(5), format!("runtime {kernel_time:?}"));
    t.note(format!("max ODE residual {:.1e}, {kernel_time:.2?}", de.residual));
    criteria.push((1, "elliptic kernel identities", t));

    // 2. B-factor laws on both periodic figures.
    let mut t = Tally::default();
    for f in type_two {
        for c in ["blaschke.unimodular_real", "blaschke.unimodular_top", "blaschke.half_period", "blaschke.conjugation"] {
            t.at_most(f, c, 1e-9, 500);
        }
    }
    criteria.push((2, "B-factor unimodularity, antiperiodicity, conjugation", t));

    // 3. Zero period and its negative control.
    let mut t = Tally::default();
    for f in figures {
        t.at_most(f, "mapping.zero_period", 1e-8, 10);
        let c = f.rec("mapping.zero_period_control");
        t.require(c.residual >= 1e3, format!("{} control ratio {:e}", f.name, c.residual));
    }
    t.note(format!("control ratio fig2 {:.1e}", fig2.rec("mapping.zero_period_control").residual));
    criteria.push((3, "zero horizontal period of F", t));

    // 4. Cross-form consistency.
    let mut t = Tally::default();
    for f in figures {
        t.at_most(f, "mapping.cross_form", 1e-7, 100);
    }
    criteria.push((4, "σ-quotient and product forms agree", t));

    // 5. Univalence claims and self-intersection at 2048 samples per side.
    let mut t = Tally::default();
    for k in 1..=6 {
        let r = fig1.rec(&format!("mapping.claim_{k}"));
        t.require(r.skipped.is_none() && r.residual > 0.0, format!("claim {k} margin {:e}", r.residual));
    }
    for f in figures {
        let trace = f.map.trace_raw(2048).expect("trace");
        let n = trace.crossings().len();
        t.require(n == 0, format!("{}: {n} crossings at 2048 samples", f.name));
    }
    criteria.push((5, "univalence claims 1–6 and no self-intersections", t));

    // 6. Topology at three resolutions.
    let mut t = Tally::default();
    for f in figures {
        for n in [256, 1024, 2048] {
            let topo = f.map.trace_raw(n).expect("trace").topology();
            let ok = if f.type_two() {
                topo.closed_curves == 2 && topo.unbounded_arcs == 0 && topo.other_open == 0
            } else {
                topo.closed_curves == 1 && topo.unbounded_arcs == 2 && topo.other_open == 0
            };
            t.require(ok, format!("{} at {n}: {topo:?}", f.name));
        }
    }
    criteria.push((6, "boundary topology stable at 256/1024/2048", t));

    // 7. Quasi-exceptional property.
    let mut t = Tally::default();
    for f in figures {
        t.at_most(f, "neumann.boundary", 1e-8, 1);
        t.at_most(f, "gradient.interior_bound", 2.0 + 1e-6, 1);
        let bc = f.map.roof.boundary_constants;
        t.require((bc.top - bc.bottom).abs() > 1e-6, format!("{} boundary constants {} {}", f.name, bc.bottom, bc.top));
        t.require(bc.bottom.min(bc.top) >= 0.0, format!("{} negative boundary constant", f.name));
    }
    criteria.push((7, "unit Neumann data, interior gradient bound, distinct constants", t));

    // 8. Null quadrature.
    let mut t = Tally::default();
    for f in type_two {
        for p in 0..4 {
            t.at_most(f, &format!("null_quadrature.g{p}"), 1e-7, 1);
        }
    }
    criteria.push((8, "null quadrature for 1, w, w², w³", t));

    // 9. Counting by the argument principle, recomputed here from v_z.
    let mut t = Tally::default();
    for f in figures {
        let roof = &f.map.roof;
        let (om, b) = (roof.omega(), roof.height());
        let dlog = |z: Complex| Ok(roof.v_zz(z)? / roof.v_z(z)?);
        match roof.epsilon {
            Some(e) => {
                let y = (e + b / 2.0) / 2.0;
                let zeros = winding(&dlog, &rectangle(om / 2.0, 4.5 * om, y, b));
                let poles = winding(&dlog, &rectangle(om / 2.0, 4.5 * om, 0.0, y));
                t.require(integer_near(zeros, 2.0), format!("{} zeros winding {zeros}", f.name));
                t.require(integer_near(poles, -2.0), format!("{} poles winding {poles}", f.name));
                t.require(f.rec("count.zeros").pass && f.rec("count.poles").pass, format!("{} battery count", f.name));
            }
            None => {
                let r = om.min(b) / 8.0;
                for c in [c64(0.0, 0.0), c64(2.0 * om, 0.0)] {
                    let w = winding(&dlog, &circle(c, r));
                    t.require(integer_near(w, -2.0), format!("{} double pole at {c}: winding {w}", f.name));
                }
                let zeros = winding(&dlog, &rectangle(om / 2.0, 4.5 * om, b / 4.0, b));
                t.require(integer_near(zeros, 2.0), format!("{} zeros winding {zeros}", f.name));
            }
        }
    }
    criteria.push((9, "zero and pole census of v_z", t));

    // 10. Flow, and the full battery through the binary on defaults.
    let mut t = Tally::default();
    for f in type_two {
        for c in ["flow.circulation_sign", "flow.far_field"] {
            t.require(f.rec(c).pass && f.rec(c).skipped.is_none(), format!("{} {c}", f.name));
        }
        t.at_most(f, "flow.speed", 1e-6, 1);
    }
    let dir = tempfile::tempdir().expect("temp dir");
    let out = dir.path().join("report.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_qed"))
        .args(["verify", "--out", out.to_str().unwrap()])
        .status()
        .expect("qed runs");
    let elapsed = start.elapsed();
    t.require(status.success(), format!("qed verify exit status {status}"));
    t.require(elapsed < Duration::from_secs(60), format!("qed verify took {elapsed:?}"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap_or_default()).unwrap_or_default();
    t.require(report["schema"] == 1 && report["pass"] == true, "report schema 1 with pass = true");
    t.note(format!("qed verify {elapsed:.2?}"));
    criteria.push((10, "flow properties and full battery on defaults", t));

    let mut all = true;
    for (n, title, tally) in &criteria {
        let ok = tally.failures.is_empty();
        all &= ok;
        let detail = if ok { tally.notes.join("; ") } else { tally.failures.join("; ") };
        println!("criterion {n:>2}: {} {title}{}", if ok { "PASS" } else { "FAIL" }, if detail.is_empty() { String::new() } else { format!(" [{detail}]") });
    }
    if all {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
