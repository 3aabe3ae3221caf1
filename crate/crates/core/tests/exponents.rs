use circle_lab::exponents::{
    alpha_p, d0, d0_star, d1, delta0, gamma, l0, p0, tau, threshold_table, to_f64, DeltaRegime,
    SavingLine,
};
use circle_lab::FormParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn fp(k: u32, d: u32) -> FormParams {
    FormParams::new(k, d).unwrap()
}

/// Brute-force `d0` straight from the defining maximum, in floats.
fn d0_float(k: u32) -> f64 {
    let kf = k as f64;
    let best = (2..k)
        .map(|j| {
            let jf = j as f64;
            let m = (2f64.powi(j as i32) + 2.0).min(jf * jf + jf);
            (kf * jf - m) / (kf - jf + 1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    kf * kf - best
}

#[test]
fn table_of_thresholds() {
    let rows = threshold_table();
    let stars: Vec<u32> = rows.iter().map(|r| r.d0_star).collect();
    assert_eq!(stars, [10, 16, 24, 35, 47, 62, 79, 97]);
    assert_eq!(rows[2].d0, rat(70, 3));
    assert_eq!(rows[7].d0, rat(482, 5));
}

#[test]
fn d0_star_range_and_asymptotics() {
    for k in 3..=30u32 {
        let s = d0_star(k).unwrap();
        assert!(2 * s >= 3 * k, "k = {k}: {s}");
        // k = 3 is the one exception: d0*(3) = 10 > 9.
        assert!(s <= k * k || k == 3, "k = {k}: {s}");
        assert!((to_f64(&d0(k).unwrap()) - d0_float(k)).abs() < 1e-9, "k = {k}");
        if k >= 10 {
            let gap = (s as f64 - (k * k - k) as f64).abs();
            assert!(gap <= 4.0 * (k as f64).sqrt(), "k = {k}: gap {gap}");
        }
    }
}

#[test]
fn cubic_threshold_exceeds_k_squared() {
    assert_eq!(d0_star(3).unwrap(), 10);
    assert_eq!(d0(3).unwrap(), rat(9, 1));
}

#[test]
fn small_k_is_refused() {
    assert!(d0(2).is_err());
    assert!(p0(fp(2, 5)).is_err());
    assert!(p0(fp(3, 3)).is_err());
}

#[test]
fn tau_and_gamma_values() {
    assert_eq!(tau(3), rat(1, 4));
    assert_eq!(tau(4), rat(1, 8));
    assert_eq!(tau(5), rat(1, 16));
    assert_eq!(tau(6), rat(1, 30));
    assert_eq!(gamma(fp(3, 7)), rat(1, 3));
    assert_eq!(gamma(fp(3, 20)), rat(1, 2));
    assert_eq!(d1(3), 13);
    assert_eq!(d1(4), 23);
}

#[test]
fn saving_line_matches_delta0_above_threshold() {
    for k in 3..=8u32 {
        let line = SavingLine::new(k, l0(k).unwrap()).unwrap();
        let dz = d0(k).unwrap();
        for d in 1..=k * k + k {
            let r = BigRational::from_integer(BigInt::from(d));
            if r <= dz {
                continue;
            }
            let delta = delta0(fp(k, d)).unwrap();
            assert_eq!(delta.regime, DeltaRegime::Interpolating);
            assert_eq!(line.eval(&r), delta.value * BigRational::from_integer(k.into()));
        }
        assert!(line.eval(&line.top).is_one());
    }
}

#[test]
fn alpha_vanishes_at_branch_point() {
    assert_eq!(alpha_p(&rat(2, 1), &rat(0, 1)).unwrap().value, rat(0, 1));
    assert_eq!(alpha_p(&rat(2, 1), &rat(1, 3)).unwrap().value, rat(1, 3));
    for (n, m) in [(1, 7), (2, 5), (3, 2), (9, 4)] {
        let delta = rat(n, m);
        let p = BigRational::one() + (BigRational::one() + rat(2, 1) * &delta).recip();
        let a = alpha_p(&p, &delta).unwrap();
        assert_eq!(a.value, rat(0, 1));
        assert!(!a.positive);
    }
    assert!(alpha_p(&rat(1, 1), &rat(0, 1)).is_err());
    assert!(alpha_p(&rat(5, 2), &rat(0, 1)).is_err());
}

#[test]
fn p0_decreases_above_threshold() {
    for k in 3..=6u32 {
        let start = d0_star(k).unwrap();
        let values: Vec<BigRational> = (start..start + 40).map(|d| p0(fp(k, d)).unwrap()).collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0], "k = {k}");
        }
        for v in &values {
            assert!(*v > BigRational::one() && *v < rat(2, 1), "k = {k}");
        }
    }
}

proptest! {
    #[test]
    fn p0_is_max_of_branches(k in 3u32..12, extra in 1u32..200) {
        let d = k + extra;
        let p = p0(fp(k, d)).unwrap();
        let first = rat(d as i64, (d - k) as i64);
        let denom = BigRational::one() + rat(2, 1) * delta0(fp(k, d)).unwrap().value;
        let expect = if denom == rat(0, 1) {
            first
        } else {
            let second = BigRational::one() + denom.recip();
            if first > second { first } else { second }
        };
        prop_assert_eq!(p, expect);
    }

    #[test]
    fn exact_outputs_are_deterministic(k in 3u32..20, d in 1u32..500) {
        prop_assert_eq!(d0(k).unwrap(), d0(k).unwrap());
        prop_assert_eq!(delta0(fp(k, d)).unwrap(), delta0(fp(k, d)).unwrap());
    }

    #[test]
    fn regime_matches_dimension(k in 3u32..10, d in 1u32..150) {
        let delta = delta0(fp(k, d)).unwrap();
        let dr = BigRational::from_integer(d.into());
        let dz = d0(k).unwrap();
        let expect = if d > k * k + k {
            DeltaRegime::Saturating
        } else if dr < dz {
            DeltaRegime::BelowThreshold
        } else {
            DeltaRegime::Interpolating
        };
        prop_assert_eq!(delta.regime, expect);
        if expect == DeltaRegime::BelowThreshold {
            prop_assert!(delta.value <= rat(0, 1));
        }
    }
}
