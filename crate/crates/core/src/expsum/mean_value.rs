use std::collections::HashMap;

use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::Turns;

/// Cap on the number of `s`-tuples (or multisets) held in a hash table.
pub const DEFAULT_TUPLE_CAP: u64 = 50_000_000;

fn binomial(n: u64, r: u64) -> Option<u64> {
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

fn power_sums(tuple: &[u64], degrees: &[u32]) -> Option<Vec<u64>> {
    degrees
        .iter()
        .map(|&j| {
            tuple
                .iter()
                .try_fold(0u64, |acc, &n| acc.checked_add(n.checked_pow(j)?))
        })
        .collect()
}

/// Visits every non-decreasing `s`-tuple over `[1, n]` with its number of
/// orderings.
fn for_each_multiset(s: usize, n: u64, mut visit: impl FnMut(&[u64], u128)) {
    let mut tuple = vec![1u64; s];
    let fact_s = factorial(s as u64);
    loop {
        let mut weight = fact_s;
        let mut run = 1u64;
        for i in 1..=s {
            if i < s && tuple[i] == tuple[i - 1] {
                run += 1;
            } else {
                weight /= factorial(run);
                run = 1;
            }
        }
        visit(&tuple, weight);
        let mut i = s;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if tuple[i] < n {
                tuple[i] += 1;
                let v = tuple[i];
                for slot in tuple.iter_mut().skip(i + 1) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Number of pairs `(n, m) ∈ [1, N]^{2s}` with `Σ n_i^j = Σ m_i^j` for every
/// `j` in `degrees`.
///
/// Tuples are hashed by their power-sum vector; each multiset is visited once
/// and weighted by its number of orderings, and the count is the sum of
/// squared bucket weights.
pub fn power_sum_pair_count(s: u32, n: u64, degrees: &[u32], cap: u64) -> Result<BigUint> {
    if s < 1 || n < 1 {
        return Err(Error::domain("need s >= 1 and N >= 1"));
    }
    let multisets = binomial(n + s as u64 - 1, s as u64).unwrap_or(u64::MAX);
    if multisets > cap {
        return Err(Error::CapExceeded {
            what: "s-tuple table",
            requested: format!("{multisets} multisets"),
            cap: cap.to_string(),
        });
    }
    let mut buckets: HashMap<Vec<u64>, u128> = HashMap::new();
    let mut overflow = false;
    for_each_multiset(s as usize, n, |t, w| match power_sums(t, degrees) {
        Some(key) => *buckets.entry(key).or_insert(0) += w,
        None => overflow = true,
    });
    if overflow {
        return Err(Error::domain("power sums overflow 64 bits"));
    }
    let mut total = BigUint::default();
    let mut acc: u128 = 0;
    for w in buckets.values() {
        match w.checked_mul(*w).and_then(|sq| acc.checked_add(sq)) {
            Some(v) => acc = v,
            None => {
                total += BigUint::from(acc);
                acc = 0;
                total += BigUint::from(*w) * BigUint::from(*w);
            }
        }
    }
    total += BigUint::from(acc);
    Ok(total)
}

/// `J_{s,k}(N)`: solutions of the simultaneous power-sum system of degrees
/// `1..=k` in `2s` variables from `[1, N]`.
pub fn vinogradov_count(s: u32, k: u32, n: u64) -> Result<BigUint> {
    if k < 1 {
        return Err(Error::domain("k must be >= 1"));
    }
    let degrees: Vec<u32> = (1..=k).collect();
    power_sum_pair_count(s, n, &degrees, DEFAULT_TUPLE_CAP)
}

fn all_tuples(s: usize, n: u64) -> Vec<Vec<u64>> {
    let total = (n as usize).pow(s as u32);
    (0..total)
        .map(|mut idx| {
            (0..s)
                .map(|_| {
                    let v = (idx % n as usize) as u64 + 1;
                    idx /= n as usize;
                    v
                })
                .collect()
        })
        .collect()
}

/// Both sides of the mean-value reduction identity at one `θ`.
///
/// * LHS: `Σ_h |a_h(θ)|^2`, with `a_h` the sum of `e(θ f_{s,k}(n))` over
///   `s`-tuples whose power sums of degrees `1..=l` equal `h`.
/// * RHS: the sum of `e(θ(f_{s,k}(n) - f_{s,k}(m)))` over all pairs with
///   matching power sums of degrees `1..=l`, enumerated pair by pair. This is
///   the `ξ`-integral of `|Weyl sum|^{2s}` by orthogonality.
pub fn mean_value_identity_check(
    theta: f64,
    s: u32,
    l: u32,
    k: u32,
    n: u64,
) -> Result<(Complex64, Complex64)> {
    if s < 1 || n < 1 {
        return Err(Error::domain("need s >= 1 and N >= 1"));
    }
    if l < 1 || l >= k {
        return Err(Error::domain(format!("need 1 <= l <= k - 1, got l = {l}, k = {k}")));
    }
    let tuples_count = (n as u128).checked_pow(s).unwrap_or(u128::MAX);
    let pairs = tuples_count.saturating_mul(tuples_count);
    if pairs > DEFAULT_TUPLE_CAP as u128 {
        return Err(Error::CapExceeded {
            what: "pair enumeration",
            requested: format!("{pairs} pairs"),
            cap: DEFAULT_TUPLE_CAP.to_string(),
        });
    }
    let tuples = all_tuples(s as usize, n);
    let low: Vec<u32> = (1..=l).collect();
    let t = Turns::from_f64(theta);
    let top = |tuple: &[u64]| {
        tuple
            .iter()
            .fold(Turns::ZERO, |acc, &m| acc + t.mul_pow(m, k))
    };

    let mut buckets: HashMap<Vec<u64>, Complex64> = HashMap::new();
    let mut order: Vec<Vec<u64>> = Vec::new();
    for tuple in &tuples {
        let key = power_sums(tuple, &low).ok_or_else(|| Error::domain("power sums overflow"))?;
        let z = top(tuple).exp();
        match buckets.get_mut(&key) {
            Some(v) => *v += z,
            None => {
                order.push(key.clone());
                buckets.insert(key, z);
            }
        }
    }
    let lhs: f64 = order.iter().map(|key| buckets[key].norm_sqr()).sum();

    let keyed: Vec<(Vec<u64>, Turns)> = tuples
        .iter()
        .map(|tuple| (power_sums(tuple, &low).expect("checked above"), top(tuple)))
        .collect();
    let rhs: Complex64 = keyed
        .par_iter()
        .map(|(kn, pn)| {
            keyed
                .iter()
                .filter(|(km, _)| km == kn)
                .map(|(_, pm)| (*pn - *pm).exp())
                .sum::<Complex64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok((Complex64::new(lhs, 0.0), rhs))
}

/// Riemann mean of `|S̃_N(θ, ξ)|^{2s}` over an `m_theta × m_xi` uniform grid.
///
/// Equals the exact pair count for degrees `{1, k}` once the grids exceed
/// the ranges of the corresponding power-sum differences.
pub fn grid_mean_value(n: u64, s: u32, k: u32, m_theta: usize, m_xi: usize) -> f64 {
    let rows: Vec<f64> = (0..m_theta)
        .into_par_iter()
        .map(|i| {
            let theta = Turns::from_ratio(i as i128, m_theta as u128);
            let coeffs: Vec<Turns> = (1..=n).map(|m| theta.mul_pow(m, k)).collect();
            (0..m_xi)
                .map(|j| {
                    let xi = Turns::from_ratio(j as i128, m_xi as u128);
                    let z: Complex64 = coeffs
                        .iter()
                        .zip(1..=n)
                        .map(|(c, m)| (*c + xi.mul_u64(m)).exp())
                        .sum();
                    z.norm_sqr().powi(s as i32)
                })
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() / (m_theta * m_xi) as f64
}
