use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::FormParams;

/// Default memory budget for a count table, in bytes.
pub const DEFAULT_TABLE_BYTES_CAP: u64 = 1 << 30;

/// Exact counts `R(λ)` for `0 <= λ <= lambda_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationTable {
    pub params: FormParams,
    pub lambda_max: u64,
    pub counts: Vec<BigUint>,
}

impl RepresentationTable {
    pub fn get(&self, lambda: u64) -> Option<&BigUint> {
        self.counts.get(lambda as usize)
    }

    /// `R(λ)` as a float (for normalised ratios).
    pub fn get_f64(&self, lambda: u64) -> Option<f64> {
        self.get(lambda).map(|c| c.to_f64().unwrap_or(f64::INFINITY))
    }
}

/// The one-dimensional sequence `c[m] = #{n ∈ ℤ : |n|^k = m}` up to `lambda_max`.
pub fn one_dimensional_counts(k: u32, lambda_max: u64) -> Vec<(u64, u32)> {
    let mut out = vec![(0, 1)];
    let mut n = 1u64;
    while let Some(p) = n.checked_pow(k) {
        if p > lambda_max {
            break;
        }
        out.push((p, 2));
        n += 1;
    }
    out
}

fn estimated_bytes(params: FormParams, lambda_max: u64) -> u64 {
    // R(λ) <= (2N + 1)^d with N = floor(λ^{1/k}).
    let n = params.root_floor(lambda_max) as f64;
    let bits = params.d() as f64 * (2.0 * n + 1.0).log2();
    let limbs = (bits / 64.0).ceil().max(1.0) as u64;
    (lambda_max + 1).saturating_mul(limbs * 8 + 24)
}

pub fn count_representations(params: FormParams, lambda_max: u64) -> Result<RepresentationTable> {
    count_representations_capped(params, lambda_max, DEFAULT_TABLE_BYTES_CAP)
}

/// `d`-fold truncated convolution of the one-dimensional counts.
pub fn count_representations_capped(
    params: FormParams,
    lambda_max: u64,
    bytes_cap: u64,
) -> Result<RepresentationTable> {
    let need = estimated_bytes(params, lambda_max);
    if need > bytes_cap {
        return Err(Error::CapExceeded {
            what: "representation table memory",
            requested: format!("{need} bytes"),
            cap: format!("{bytes_cap} bytes"),
        });
    }
    let len = usize::try_from(lambda_max + 1)
        .map_err(|_| Error::domain("lambda_max does not fit in memory indices"))?;
    let powers = one_dimensional_counts(params.k(), lambda_max);

    let mut counts = vec![BigUint::zero(); len];
    counts[0] = BigUint::from(1u32);
    for _ in 0..params.d() {
        let prev = &counts;
        counts = (0..len)
            .into_par_iter()
            .map(|lambda| {
                let mut acc = BigUint::zero();
                for &(p, mult) in &powers {
                    let p = p as usize;
                    if p > lambda {
                        break;
                    }
                    let v = &prev[lambda - p];
                    if !v.is_zero() {
                        if mult == 1 {
                            acc += v;
                        } else {
                            acc += v * mult;
                        }
                    }
                }
                acc
            })
            .collect();
    }
    Ok(RepresentationTable {
        params,
        lambda_max,
        counts,
    })
}
