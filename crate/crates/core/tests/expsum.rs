use std::f64::consts::TAU;

use circle_lab::arcs::dissect;
use circle_lab::expsum::{
    gauss_fourier_check, gauss_sum, gauss_sum_multi, gauss_sum_naive, grid_mean_value,
    mean_value_identity_check, mean_value_integral_estimate, mean_value_integral_xi_averaged,
    minor_arc_sup_scan, power_sum_pair_count, s_n, s_n_one_sided, sup_over_xi, vinogradov_count,
    weyl_sum, IntegralDomain, PhaseVector, SupConfig, XiSampling, DEFAULT_TUPLE_CAP,
};
use circle_lab::stats::loglog_slope;
use circle_lab::{Error, FormParams};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn direct(phase: f64) -> Complex64 {
    let (s, c) = (TAU * phase).sin_cos();
    Complex64::new(c, s)
}

/// Ordered-pair count straight from the definition.
fn brute_pair_count(s: u32, n: u64, degrees: &[u32]) -> u64 {
    let tuples = n.pow(s);
    let key = |mut idx: u64| -> Vec<u64> {
        let t: Vec<u64> = (0..s)
            .map(|_| {
                let v = idx % n + 1;
                idx /= n;
                v
            })
            .collect();
        degrees.iter().map(|&j| t.iter().map(|x| x.pow(j)).sum()).collect()
    };
    let keys: Vec<Vec<u64>> = (0..tuples).map(key).collect();
    let mut total = 0;
    for a in &keys {
        total += keys.iter().filter(|b| *b == a).count() as u64;
    }
    total
}

/// `e(a m^k / 2^20 + b m / 2^20)` reduced in integers.
fn dyadic_phase(a: u64, b: i64, m: i64, k: u32) -> Complex64 {
    let modulus = 1i128 << 20;
    let r = (a as i128 * (m.unsigned_abs() as i128).pow(k) + b as i128 * m as i128).rem_euclid(modulus);
    direct(r as f64 / modulus as f64)
}

#[test]
fn sums_match_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scale = (1u64 << 20) as f64;
    for _ in 0..50 {
        let a = rng.gen_range(0..1u64 << 20);
        let b = rng.gen_range(-(1i64 << 20)..1 << 20);
        let (theta, xi) = (a as f64 / scale, b as f64 / scale);
        let n = rng.gen_range(1..40u64);
        let k = rng.gen_range(2..6u32);
        let two: Complex64 = (-(n as i64)..=n as i64).map(|m| dyadic_phase(a, b, m, k)).sum();
        let one: Complex64 = (1..=n as i64).map(|m| dyadic_phase(a, b, m, k)).sum();
        assert!((s_n(theta, xi, n, k) - two).norm() < 1e-12);
        assert!((s_n_one_sided(theta, xi, n, k) - one).norm() < 1e-12);
        let w = weyl_sum(&PhaseVector::new(theta, vec![xi]), k, n).unwrap();
        assert!((w - one).norm() < 1e-12);
    }
    assert_eq!(s_n(0.0, 0.0, 7, 3), Complex64::new(15.0, 0.0));
    assert!(weyl_sum(&PhaseVector::new(0.1, vec![0.2, 0.3]), 2, 5).is_err());
    assert!(weyl_sum(&PhaseVector::new(0.1, vec![]), 3, 0).is_err());
}

#[test]
fn phases_survive_large_arguments() {
    // θ = 1/3 with n up to 10^5: θn^3 reaches 3·10^14, past float phase accuracy.
    let n = 100_000u64;
    let k = 3;
    let got = s_n_one_sided(1.0 / 3.0, 0.0, n, k);
    let residue = |m: u64| (m % 3).pow(3) % 3;
    let expect: Complex64 = (1..=n).map(|m| direct(residue(m) as f64 / 3.0)).sum();
    assert!((got - expect).norm() < 1e-6 * n as f64, "{got} vs {expect}");
}

#[test]
fn orthogonality_at_two_resolutions() {
    for (n, s, k) in [(4u64, 1u32, 3u32), (6, 2, 3), (5, 2, 4), (3, 2, 5)] {
        let exact = power_sum_pair_count(s, n, &[1, k], DEFAULT_TUPLE_CAP).unwrap();
        let exact: f64 = exact.to_string().parse().unwrap();
        let theta_range = (s as u64 * n.pow(k)) as usize;
        let xi_range = (s as u64 * n) as usize;
        let coarse = grid_mean_value(n, s, k, (theta_range + 1).next_power_of_two(), (xi_range + 1).next_power_of_two());
        let fine = grid_mean_value(n, s, k, 4 * (theta_range + 1).next_power_of_two(), 4 * (xi_range + 1).next_power_of_two());
        for v in [coarse, fine] {
            assert!((v - exact).abs() <= 1e-6 * exact, "N={n} s={s} k={k}: {v} vs {exact}");
        }
    }
}

#[test]
fn pair_counts_match_brute_force() {
    for (s, n, degrees) in [(2u32, 6u64, vec![1u32, 3]), (3, 5, vec![1, 2]), (2, 7, vec![1, 2, 3]), (1, 9, vec![2])] {
        let got = power_sum_pair_count(s, n, &degrees, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(got, BigUint::from(brute_pair_count(s, n, &degrees)));
    }
    assert_eq!(vinogradov_count(2, 3, 2).unwrap(), BigUint::from(6u32));
    for n in [3u64, 5, 8] {
        let j = vinogradov_count(3, 3, n).unwrap();
        // The pairs (x, σx) over permutations σ give at least N^s solutions.
        assert!(j >= BigUint::from(n.pow(3)));
    }
    let err = power_sum_pair_count(8, 100, &[1, 2], 1000).unwrap_err();
    assert!(matches!(err, Error::CapExceeded { .. }));
}

#[test]
fn gauss_exact_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in [3u32, 4, 5] {
        for _ in 0..60 {
            let q = rng.gen_range(1..=1000u64);
            let a = loop {
                // Keep |a|(q-1)^k within f64's exact integer range.
                let bound = ((1u64 << 52) / (q.max(2) - 1).pow(k)).clamp(1, q) as i64;
                let a = rng.gen_range(0..bound.max(1));
                if (a as u64).gcd(&q) == 1 {
                    break a;
                }
            };
            let b = rng.gen_range(0..q as i64);
            let exact = gauss_sum(q, a, b, k).unwrap().value;
            assert!(exact.norm() <= 1.0 + 1e-12);
            let naive = gauss_sum_naive(q, a, b, k);
            assert!((exact - naive).norm() < 1e-9, "q={q} a={a} b={b} k={k}");
        }
    }
}

#[test]
fn gauss_fourier_exhaustive() {
    for k in [3u32, 4, 5] {
        for q in 1..=40u64 {
            for a in (0..q).filter(|a| a.gcd(&q) == 1) {
                for m in 0..q as i64 {
                    let (lhs, rhs) = gauss_fourier_check(q, a as i64, m, k).unwrap();
                    assert!((lhs - rhs).norm() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn gauss_multi_and_errors() {
    let p = FormParams::new(3, 3).unwrap();
    let b = [1i64, 4, 2];
    let prod: Complex64 = b.iter().map(|&bj| gauss_sum(7, 3, bj, 3).unwrap().value).product();
    assert!((gauss_sum_multi(7, 3, &b, p).unwrap() - prod).norm() < 1e-14);
    assert!(gauss_sum_multi(7, 3, &b[..2], p).is_err());
    assert!(gauss_sum(6, 4, 0, 3).is_err());
    assert!(gauss_sum(0, 1, 0, 3).is_err());
}

#[test]
fn mean_value_identity_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let thetas: Vec<f64> = (0..20).map(|_| rng.gen()).collect();
    for k in [3u32, 4] {
        for s in 1..=2u32 {
            for l in 1..=2u32 {
                for n in [1u64, 4, 8] {
                    for &theta in &thetas {
                        let (lhs, rhs) = mean_value_identity_check(theta, s, l, k, n).unwrap();
                        assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm(), "k={k} s={s} l={l} N={n}");
                    }
                }
            }
        }
    }
    assert!(mean_value_identity_check(0.1, 2, 3, 3, 4).is_err());
}

#[test]
fn sup_scan_basics() {
    let cfg = SupConfig::default();
    let (sup, xi) = sup_over_xi(0.0, 10, 3, cfg);
    assert!((sup - 21.0).abs() < 1e-9 && xi.abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let theta: f64 = rng.gen();
        let n = rng.gen_range(1..60u64);
        let (sup, xi) = sup_over_xi(theta, n, 3, cfg);
        assert!((s_n(theta, xi, n, 3).norm() - sup).abs() < 1e-9);
        assert!(sup <= (2 * n + 1) as f64 + 1e-9);
        let grid = (0..256)
            .map(|j| s_n(theta, j as f64 / 256.0, n, 3).norm())
            .fold(0.0, f64::max);
        assert!(sup >= grid - 1e-9);
    }
    let diss = dissect(8, 3).unwrap();
    let err = minor_arc_sup_scan(8, 3, &[0.0, 0.5], &XiSampling::Refined(cfg), &diss).unwrap_err();
    assert!(matches!(err, Error::EmptySample(_)));
    let scan = minor_arc_sup_scan(8, 3, &[0.0, 0.123, 0.377], &XiSampling::Points(vec![0.0, 0.25]), &diss).unwrap();
    assert_eq!((scan.accepted, scan.rejected), (2, 1));
}

#[test]
fn parseval_on_the_full_circle() {
    for (n, k) in [(4u64, 3u32), (3, 4), (6, 2)] {
        let m_theta = (n.pow(k) as usize + 1).next_power_of_two() * 2;
        let m_xi = (4 * n as usize + 1).next_power_of_two();
        let v = mean_value_integral_xi_averaged(2.0, k, n, IntegralDomain::FullCircle, m_theta, m_xi).unwrap();
        assert!((v - (2 * n + 1) as f64).abs() < 1e-9, "N={n} k={k}: {v}");
    }
}

#[test]
fn integral_refusals_and_monotonicity() {
    let cfg = SupConfig::default();
    let diss = dissect(8, 3).unwrap();
    let err = mean_value_integral_estimate(4.0, 3, 8, IntegralDomain::MinorArcs(&diss), 100, cfg).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    assert!(mean_value_integral_estimate(1.5, 3, 8, IntegralDomain::FullCircle, 4096, cfg).is_err());
    let mut prev = 0.0;
    for r in [2.0, 3.0, 4.0, 6.0] {
        let v = mean_value_integral_estimate(r, 3, 8, IntegralDomain::MinorArcs(&diss), 2048, cfg).unwrap();
        assert!(v >= prev);
        prev = v;
    }
    let none: [(f64, f64); 0] = [];
    assert_eq!(
        mean_value_integral_estimate(2.0, 3, 8, IntegralDomain::Intervals(&none), 2048, cfg).unwrap(),
        0.0
    );
}

#[test]
fn minor_arc_tenth_moment_trend() {
    let cfg = SupConfig::default();
    let (k, r) = (3u32, 10.0);
    let ns = [16u64, 32, 64];
    let values: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let diss = dissect(n, k).unwrap();
            let grid = (8 * k as u64 * n.pow(k - 1)) as usize;
            mean_value_integral_estimate(r, k, n, IntegralDomain::MinorArcs(&diss), grid, cfg).unwrap()
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &values).unwrap();
    assert!(slope < r - k as f64 + 0.5, "slope {slope}, values {values:?}");
}

proptest! {
    #[test]
    fn conjugation(theta in -2.0f64..2.0, xi in -2.0f64..2.0, n in 0u64..80, k in 2u32..6) {
        let a = s_n(-theta, -xi, n, k);
        let b = s_n(theta, xi, n, k).conj();
        prop_assert!((a - b).norm() <= 1e-12 * (2 * n + 1) as f64);
    }

    #[test]
    fn gauss_modulus_bounded(q in 1u64..200, a in 0i64..200, b in -300i64..300, k in 2u32..7) {
        if (a.rem_euclid(q as i64) as u64).gcd(&q) == 1 {
            let g = gauss_sum(q, a, b, k).unwrap();
            prop_assert!(g.value.norm() <= 1.0 + 1e-12);
            let shifted = gauss_sum(q, a + q as i64, b - q as i64, k).unwrap();
            prop_assert!((g.value - shifted.value).norm() < 1e-12);
        }
    }
}
