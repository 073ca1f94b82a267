//! The q-series kernel against direct lattice sums.

use std::f64::consts::TAU;

use qed_core::{c64, Complex, Lattice, LatticeKind};

/// `Σ' g(w)` over the square shell set `|m|, |n| ≤ n_max`, `w = 2mω₁ + 2nω₃`.
fn lattice_sum(lat: &Lattice, n_max: i64, g: impl Fn(Complex) -> Complex) -> Complex {
    let [g1, g2] = lat.generators();
    let mut s = c64(0.0, 0.0);
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            if m == 0 && n == 0 {
                continue;
            }
            s += g(g1 * m as f64 + g2 * n as f64);
        }
    }
    s
}

/// Two-level extrapolation for a truncation error of order `N^{-p}`.
fn richardson(coarse: Complex, fine: Complex, p: i32) -> Complex {
    let r = 2f64.powi(p);
    (fine * r - coarse) / (r - 1.0)
}

fn wp_direct(lat: &Lattice, z: Complex) -> Complex {
    let sum = |n| z.powi(-2) + lattice_sum(lat, n, |w| (z - w).powi(-2) - w.powi(-2));
    richardson(sum(60), sum(120), 2)
}

fn lattices() -> Vec<Lattice> {
    vec![
        Lattice::build(1.0, 2.0, LatticeKind::Roof).unwrap(),
        Lattice::build(1.0, 1.5, LatticeKind::B).unwrap(),
        Lattice::rectangular(1.0, 1.0).unwrap(),
        Lattice::rectangular(0.7, 2.3).unwrap(),
    ]
}

#[test]
fn invariants_match_eisenstein_sums() {
    for lat in lattices() {
        let g2 = richardson(
            lattice_sum(&lat, 60, |w| w.powi(-4)),
            lattice_sum(&lat, 120, |w| w.powi(-4)),
            2,
        ) * 60.0;
        let g3 = lattice_sum(&lat, 60, |w| w.powi(-6)) * 140.0;
        assert!((g2 - lat.g2).norm() < 1e-7 * (1.0 + lat.g2.norm()), "{g2} vs {}", lat.g2);
        assert!((g3 - lat.g3).norm() < 1e-9 * (1.0 + lat.g3.norm()), "{g3} vs {}", lat.g3);
        assert!(lat.g2.im.abs() < 1e-12 && lat.g3.im.abs() < 1e-12);
    }
}

#[test]
fn wp_matches_direct_sum() {
    for lat in lattices() {
        let (a, b) = (lat.half_period_real, lat.half_period_imag);
        for z in [c64(0.3 * a, 0.2 * b), c64(-0.7 * a, 0.55 * b), c64(1.4 * a, -0.9 * b), c64(a, b)] {
            let direct = wp_direct(&lat, z);
            let kernel = lat.wp(z).unwrap();
            assert!((direct - kernel).norm() < 1e-7 * (1.0 + kernel.norm()), "{z}: {direct} vs {kernel}");
        }
    }
}

#[test]
fn wp_prime_matches_direct_sum() {
    for lat in lattices() {
        let z = c64(0.41 * lat.half_period_real, 0.37 * lat.half_period_imag);
        let direct = z.powi(-3) * -2.0 + lattice_sum(&lat, 80, |w| (z - w).powi(-3) * -2.0);
        let kernel = lat.wp_prime(z).unwrap();
        assert!((direct - kernel).norm() < 1e-6 * (1.0 + kernel.norm()), "{direct} vs {kernel}");
    }
}

#[test]
fn half_period_values_are_the_cubic_roots() {
    for lat in lattices() {
        let e: Vec<Complex> = [lat.omega1(), lat.omega1() + lat.omega3(), lat.omega3()]
            .iter()
            .map(|w| lat.wp(*w).unwrap())
            .collect();
        let sum: Complex = e.iter().sum();
        assert!(sum.norm() < 1e-11 * (1.0 + lat.g2.norm()));
        for ek in &e {
            let cubic = ek.powi(3) * 4.0 - lat.g2 * ek - lat.g3;
            assert!(cubic.norm() < 1e-9 * (1.0 + ek.norm().powi(3)));
            assert!(ek.im.abs() < 1e-12);
        }
        assert!(e[0].re > e[1].re && e[1].re > e[2].re);
    }
}

#[test]
fn log_sigma_derivative_is_zeta_across_cells() {
    let h = 1e-5;
    for lat in lattices() {
        let (a, b) = (lat.half_period_real, lat.half_period_imag);
        for z in [c64(0.999 * a, 0.3 * b), c64(1.001 * a, 0.3 * b), c64(2.5 * a, 1.02 * b), c64(-3.3 * a, -2.9 * b)] {
            let mut d = lat.ln_sigma(z + h) - lat.ln_sigma(z - h);
            d.im -= TAU * (d.im / TAU).round();
            let fd = d / (2.0 * h);
            let zeta = lat.zeta(z).unwrap();
            assert!((fd - zeta).norm() < 1e-6 * (1.0 + zeta.norm()), "{z}: {fd} vs {zeta}");
            let fd_zeta = (lat.zeta(z + h).unwrap() - lat.zeta(z - h).unwrap()) / (2.0 * h);
            let wp = lat.wp(z).unwrap();
            assert!((fd_zeta + wp).norm() < 1e-5 * (1.0 + wp.norm()));
        }
    }
}

#[test]
fn sigma_taylor_expansion_at_origin() {
    for lat in lattices() {
        for z in [c64(0.01, 0.02), c64(-0.03, 0.015)] {
            let series = z - lat.g2 * z.powi(5) / 240.0 - lat.g3 * z.powi(7) / 840.0;
            let s = lat.sigma(z);
            assert!((s - series).norm() < 1e-14, "{s} vs {series}");
        }
    }
}

#[test]
fn zeta_at_half_periods_gives_eta() {
    for lat in lattices() {
        assert!((lat.zeta(lat.omega1()).unwrap() - lat.eta1).norm() < 1e-12);
        assert!((lat.zeta(lat.omega3()).unwrap() - lat.eta3).norm() < 1e-12);
    }
}

/// `σ(z₁)/σ(z₀) = exp ∫ ζ`, with the integral by composite Simpson on a
/// straight segment; this crosses several cells and exercises the
/// quasi-periodic bookkeeping of `ln σ`.
#[test]
fn sigma_by_continuation_of_zeta() {
    for lat in lattices() {
        let (a, b) = (lat.half_period_real, lat.half_period_imag);
        let z0 = c64(0.3 * a, 0.2 * b);
        for z1 in [c64(2.5 * a, 1.02 * b), c64(-3.3 * a, -2.9 * b), c64(4.6 * a, -3.1 * b)] {
            let n = 20_000;
            let h = (z1 - z0) / n as f64;
            let mut s = lat.zeta(z0).unwrap() + lat.zeta(z1).unwrap();
            for k in 1..n {
                s += lat.zeta(z0 + h * k as f64).unwrap() * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            let ratio = (lat.ln_sigma(z1) - lat.ln_sigma(z0) - integral).exp();
            assert!((ratio - 1.0).norm() < 1e-9, "{z1}: {ratio}");
        }
    }
}
