//! Roof functions against closed forms in ζ and ln σ.

use std::f64::consts::TAU;

use qed_core::quad::{integrate_path, QuadOptions};
use qed_core::{c64, Complex, DomainKind, RoofField, I};

fn interior_points(om: f64, b: f64) -> Vec<Complex> {
    let mut pts = Vec::new();
    for i in 1..8 {
        for j in 1..6 {
            pts.push(c64(4.0 * om * i as f64 / 8.0 + 0.013, b * j as f64 / 6.0 + 0.007));
        }
    }
    pts
}

/// Type I: `v = −2 Im ζ(z) − 2c₀ y + C`.
#[test]
fn type_one_closed_form() {
    for (om, b) in [(1.0, 2.0), (1.0, 1.5), (0.8, 2.4)] {
        let rf = RoofField::build(DomainKind::TypeI, om, b, None).unwrap();
        let closed = |z: Complex| -2.0 * rf.lat.zeta(z).unwrap().im - 2.0 * rf.c0 * z.im;
        let base = rf.base_point;
        let k = rf.base_value - closed(base);
        for z in interior_points(om, b) {
            let v = rf.v_value(z).unwrap();
            assert!((v - closed(z) - k).abs() < 1e-9 * (1.0 + v.abs()), "{z}: {v} vs {}", closed(z) + k);
        }
    }
}

/// Type II: `∫ v_z = i(c₀ − 1/c) z + (i / (c² ℘′(a))) [ln σ(z − a) − ln σ(z + a) + 2ζ(a) z]`
/// with `a = iε`; only the real part enters `v`, so the branch of `ln σ` is irrelevant.
#[test]
fn type_two_closed_form() {
    for (om, b, e) in [(1.0, 2.0, 0.5), (1.0, 1.5, 0.4), (1.0, 2.0, 0.2)] {
        let rf = RoofField::build(DomainKind::TypeII, om, b, Some(e)).unwrap();
        let lat = &rf.lat;
        let (c, a) = (rf.c_pole, c64(0.0, e));
        let coef = I / (lat.wp_prime(a).unwrap() * c * c);
        let zeta_a = lat.zeta(a).unwrap();
        let closed = |z: Complex| {
            let prim = I * (rf.c0 - 1.0 / c) * z + coef * (lat.ln_sigma(z - a) - lat.ln_sigma(z + a) + zeta_a * 2.0 * z);
            2.0 * prim.re
        };
        let k = rf.base_value - closed(rf.base_point);
        for z in interior_points(om, b) {
            let v = rf.v_value(z).unwrap();
            assert!((v - closed(z) - k).abs() < 1e-9 * (1.0 + v.abs()), "{z}: {v} vs {}", closed(z) + k);
        }
        let res = rf.residue().unwrap();
        assert!((coef.re - res).abs() < 1e-12 && coef.im.abs() < 1e-12, "{coef} vs {res}");
    }
}

#[test]
fn residue_by_contour_integral() {
    for (b, e) in [(2.0, 0.5), (1.5, 0.4)] {
        let rf = RoofField::build(DomainKind::TypeII, 1.0, b, Some(e)).unwrap();
        let r = 0.1 * e;
        for centre in [c64(0.0, e), c64(4.0, e), c64(2.0, -e)] {
            let circle: Vec<Complex> = (0..=64).map(|k| centre + Complex::from_polar(r, TAU * (k % 64) as f64 / 64.0)).collect();
            let loop_integral = integrate_path(&|z| rf.v_z(z), &circle, &QuadOptions::default()).unwrap();
            let res = loop_integral / (I * TAU);
            let expected = if centre.im > 0.0 { rf.residue().unwrap() } else { -rf.residue().unwrap() };
            assert!((res - expected).norm() < 1e-8, "{centre}: {res} vs {expected}");
        }
    }
}

#[test]
fn figure_residues() {
    let fig2 = RoofField::build(DomainKind::TypeII, 1.0, 2.0, Some(0.5)).unwrap();
    let fig3 = RoofField::build(DomainKind::TypeII, 1.0, 1.5, Some(0.4)).unwrap();
    assert!((fig2.residue().unwrap() + 1.06922).abs() < 1e-5);
    assert!((fig3.residue().unwrap() + 1.28729).abs() < 1e-5);
}

/// As `ε → 0` the interior pole merges with the boundary and the Type II
/// field tends to the Type I field, with an error of order `ε²`.
#[test]
fn small_epsilon_limit() {
    let t1 = RoofField::build(DomainKind::TypeI, 1.0, 2.0, None).unwrap();
    let probes = [c64(1.0, 1.0), c64(2.7, 1.6), c64(0.5, 0.8)];
    let gap = |e: f64| {
        let t2 = RoofField::build(DomainKind::TypeII, 1.0, 2.0, Some(e)).unwrap();
        probes
            .iter()
            .map(|z| (t2.v_z(*z).unwrap() - t1.v_z(*z).unwrap()).norm())
            .fold(0.0, f64::max)
    };
    let (g1, g2) = (gap(0.02), gap(0.01));
    assert!(g2 < 1e-3, "{g2}");
    let order = (g1 / g2).log2();
    assert!((order - 2.0).abs() < 0.1, "{order}");
}

#[test]
fn positive_inside_and_constant_on_sides() {
    let rf = RoofField::build(DomainKind::TypeII, 1.0, 1.5, Some(0.4)).unwrap();
    let xs: Vec<f64> = (0..40).map(|i| 4.0 * (i as f64 + 0.5) / 40.0).collect();
    let ys: Vec<f64> = (0..=30).map(|j| 1.5 * j as f64 / 30.0).collect();
    let grid = rf.v_on_grid(&xs, &ys).unwrap();
    let bc = rf.boundary_constants;
    for col in &grid {
        assert!((col[0] - bc.bottom).abs() < 1e-8);
        assert!((col[30] - bc.top).abs() < 1e-8);
        assert!(col[1..30].iter().all(|v| *v > 0.0));
    }
    assert_eq!(bc.bottom.min(bc.top), 0.0);
}
