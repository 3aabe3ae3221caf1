use std::f64::consts::TAU;

use circle_lab::oscillatory::{
    check_vn_bound2, j_lambda, j_lambda_theta, sigma_hat, surface_mass, v_n, vn_basic_ratio,
    QuadratureSpec,
};
use circle_lab::{Error, FormParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fp(k: u32, d: u32) -> FormParams {
    FormParams::new(k, d).unwrap()
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// Composite Simpson rule for `∫_0^N e(θt^k + ξt) dt` on a fixed fine mesh.
fn simpson_vn(theta: f64, xi: f64, n: f64, k: i32, steps: usize) -> Complex64 {
    let h = n / steps as f64;
    let f = |t: f64| e(theta * t.powi(k) + xi * t);
    let mut acc = f(0.0) + f(n);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn halving_the_budget_changes_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let coarse = spec();
    let fine = QuadratureSpec { phase_budget: coarse.phase_budget / 2.0, ..coarse };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.gen_range(2..=5u32);
        let n: f64 = rng.gen_range(1.0..=1000.0);
        // Keep the total phase variation moderate so the panel count stays small.
        let theta = rng.gen_range(-200.0..200.0) / n.powi(k as i32);
        let xi = rng.gen_range(-2.0..2.0);
        let a = v_n(theta, xi, n, k, &coarse).unwrap();
        let b = v_n(theta, xi, n, k, &fine).unwrap();
        worst = worst.max((a - b).norm() / b.norm().max(1e-300));
    }
    assert!(worst < 1e-10, "worst relative change {worst:e}");
}

#[test]
fn matches_an_independent_simpson_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let k = rng.gen_range(2..=4u32);
        let n: f64 = rng.gen_range(1.0..=20.0);
        let theta = rng.gen_range(-5.0..5.0) / n.powi(k as i32);
        let xi = rng.gen_range(-1.0..1.0);
        let a = v_n(theta, xi, n, k, &spec()).unwrap();
        let b = simpson_vn(theta, xi, n, k as i32, 200_000);
        assert!((a - b).norm() < 1e-9 * n, "{a} vs {b}");
    }
}

#[test]
fn closed_form_at_zero_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let xi: f64 = rng.gen_range(-1.0..1.0);
        let n: f64 = rng.gen_range(1.0..=1000.0);
        let exact = (e(xi * n) - 1.0) / Complex64::new(0.0, TAU * xi);
        assert!((v_n(0.0, xi, n, 3, &spec()).unwrap() - exact).norm() < 1e-10);
    }
    assert!((v_n(0.0, 0.0, 1.0, 4, &spec()).unwrap() - 1.0).norm() < 1e-15);
}

#[test]
fn normalised_bounds_stay_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut basic = 0.0f64;
    let mut second = 0.0f64;
    for e2 in 4..=10 {
        let n = (1u64 << e2) as f64;
        for _ in 0..20 {
            let theta = rng.gen_range(-1.0..1.0) * 50.0 / n.powi(3);
            let xi = rng.gen_range(-1.0..1.0) * 50.0 / n;
            basic = basic.max(vn_basic_ratio(theta, xi, n, 3, &spec()).unwrap());
            second = second.max(check_vn_bound2(theta, xi, n, 3, &spec()).unwrap());
        }
        let at_zero = vn_basic_ratio(rng.gen_range(-1.0..1.0) / n.powi(3), 0.0, n, 3, &spec()).unwrap();
        let plain = at_zero / (1.0 + 1.0f64).powf(1.0 / 3.0);
        assert!(plain <= 1.0 + 1e-9);
    }
    assert!(basic < 4.0 && second < 4.0, "basic {basic}, second {second}");
    assert!((vn_basic_ratio(0.0, 0.0, 10.0, 3, &spec()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn surface_mass_values() {
    let spec = spec();
    for (k, d) in [(3u32, 5u32), (3, 7), (4, 6), (2, 3), (5, 11)] {
        let mass = surface_mass(fp(k, d));
        for lambda in [1.0, 10.0, 1000.0] {
            let s = sigma_hat(&vec![0.0; d as usize], lambda, fp(k, d), &spec).unwrap();
            assert!((s.re - mass).abs() < 1e-9 * mass && s.im.abs() < 1e-9 * mass);
            let j = j_lambda(&vec![0.0; d as usize], lambda, fp(k, d), &spec).unwrap();
            assert!((j - s / fp(k, d).normalisation(lambda)).norm() < 1e-12 * j.norm());
        }
    }
    // d = 3, k = 2: the positive octant of the unit sphere, mass Γ(3/2)^3/Γ(3/2) = π/4.
    assert!((surface_mass(fp(2, 3)) - std::f64::consts::PI / 4.0).abs() < 1e-14);
}

#[test]
fn scale_covariance() {
    let p = fp(3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..5 {
        let eta: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let (l1, l2) = (100.0, 800.0);
        let scaled: Vec<f64> = eta.iter().map(|x| x * 2.0).collect();
        let a = sigma_hat(&scaled, l1, p, &spec()).unwrap();
        let b = sigma_hat(&eta, l2, p, &spec()).unwrap();
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn symmetry_and_domination() {
    let p = fp(3, 5);
    let mass = surface_mass(p);
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..10 {
        let eta: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let neg: Vec<f64> = eta.iter().map(|x| -x).collect();
        let a = sigma_hat(&eta, 64.0, p, &spec()).unwrap();
        let b = sigma_hat(&neg, 64.0, p, &spec()).unwrap();
        assert!((a - b.conj()).norm() < 1e-10);
        assert!(a.norm() <= mass + 1e-6);
        // Permuting coordinates leaves the symmetric surface unchanged.
        let mut perm = eta.clone();
        perm.rotate_left(2);
        let c = sigma_hat(&perm, 64.0, p, &spec()).unwrap();
        assert!((a - c).norm() < 1e-10);
    }
}

#[test]
fn theta_route_agrees() {
    let p = fp(3, 10);
    let loose = QuadratureSpec { tail_tolerance: 1e-3, ..spec() };
    let lambda = 50.0;
    let zero = vec![0.0; 10];
    let radial = j_lambda(&zero, lambda, p, &spec()).unwrap();
    let theta = j_lambda_theta(&zero, lambda, p, &loose).unwrap();
    assert!((radial - theta).norm() < 1e-3 * radial.norm(), "{radial} vs {theta}");
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let eta: Vec<f64> = (0..10).map(|_| rng.gen_range(-0.1..0.1)).collect();
    let radial = j_lambda(&eta, lambda, p, &spec()).unwrap();
    let theta = j_lambda_theta(&eta, lambda, p, &loose).unwrap();
    assert!((radial - theta).norm() < 1e-3 * radial.norm(), "{radial} vs {theta}");
}

#[test]
fn refusals() {
    let s = spec();
    assert!(matches!(sigma_hat(&[0.0; 3], 10.0, fp(3, 3), &s), Err(Error::Domain(_))));
    assert!(sigma_hat(&[0.0; 5], 0.5, fp(3, 5), &s).is_err());
    assert!(sigma_hat(&[0.0; 4], 10.0, fp(3, 5), &s).is_err());
    assert!(sigma_hat(&[f64::NAN, 0.0, 0.0, 0.0, 0.0], 10.0, fp(3, 5), &s).is_err());
    assert!(v_n(0.1, 0.0, -1.0, 3, &s).is_err());
    let tight = QuadratureSpec { max_panels: 10, ..s };
    assert!(matches!(v_n(1.0, 0.0, 50.0, 3, &tight), Err(Error::CapExceeded { .. })));
    let strict = QuadratureSpec { tail_tolerance: 1e-12, ..s };
    assert!(matches!(
        j_lambda_theta(&[0.0; 4], 10.0, fp(3, 4), &strict),
        Err(Error::CapExceeded { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vn_conjugation(theta in -1.0f64..1.0, xi in -3.0f64..3.0, n in 0.5f64..20.0, k in 2u32..5) {
        let a = v_n(-theta, -xi, n, k, &spec()).unwrap();
        let b = v_n(theta, xi, n, k, &spec()).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12 * n);
        prop_assert!(b.norm() <= n * (1.0 + 1e-12));
    }
}
