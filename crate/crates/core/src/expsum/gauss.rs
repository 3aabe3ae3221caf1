use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::params::FormParams;
use crate::phase::{e, e_q};

/// A complete normalised Gauss sum `G(q; a, b) = q^{-1} Σ_{x ∈ ℤ_q} e_q(ax^k + bx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSum {
    pub q: u64,
    pub a: i64,
    pub b: i64,
    pub k: u32,
    pub value: Complex64,
}

fn pow_mod(base: u64, exp: u32, m: u64) -> u64 {
    let m = m as u128;
    let mut result = 1u128 % m;
    let mut b = base as u128 % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    result as u64
}

fn check(q: u64, a: i64) -> Result<()> {
    if q == 0 {
        return Err(Error::domain("modulus q must be >= 1"));
    }
    if (a.rem_euclid(q as i64) as u64).gcd(&q) != 1 {
        return Err(Error::domain(format!("gcd(a, q) must be 1, got a = {a}, q = {q}")));
    }
    Ok(())
}

/// Residues `x^k mod q` for `x ∈ [0, q)`.
fn power_residues(q: u64, k: u32) -> Vec<u64> {
    (0..q).map(|x| pow_mod(x, k, q)).collect()
}

fn sum_with(q: u64, a: i64, b: i64, powers: &[u64]) -> Complex64 {
    let qq = q as i128;
    let a = (a as i128).rem_euclid(qq);
    let b = (b as i128).rem_euclid(qq);
    let s: Complex64 = powers
        .iter()
        .enumerate()
        .map(|(x, &xk)| e_q(a * xk as i128 + b * x as i128, q))
        .sum();
    s / q as f64
}

/// Reduces `ax^k + bx` modulo `q` in integers before forming each phase.
pub fn gauss_sum(q: u64, a: i64, b: i64, k: u32) -> Result<GaussSum> {
    check(q, a)?;
    let value = sum_with(q, a, b, &power_residues(q, k));
    Ok(GaussSum { q, a, b, k, value })
}

/// `G(q; a, b)` for every `b ∈ [0, q)`.
pub fn gauss_row(q: u64, a: i64, k: u32) -> Result<Vec<Complex64>> {
    check(q, a)?;
    let powers = power_residues(q, k);
    Ok((0..q as i64).map(|b| sum_with(q, a, b, &powers)).collect())
}

/// Float-phase evaluation without integer modular arithmetic (reference only).
///
/// `ax^k + bx` is formed in `f64` and reduced with a float remainder, so the
/// phases are exact while `|a|(q-1)^k + |b|(q-1) < 2^53`.
pub fn gauss_sum_naive(q: u64, a: i64, b: i64, k: u32) -> Complex64 {
    let qf = q as f64;
    let s: Complex64 = (0..q)
        .map(|x| {
            let xf = x as f64;
            let m = a as f64 * xf.powi(k as i32) + b as f64 * xf;
            e(m.rem_euclid(qf) / qf)
        })
        .sum();
    s / q as f64
}

/// `Π_j G(q; a, b_j)`: the `d`-dimensional sum over representatives in `[0, q)^d`.
pub fn gauss_sum_multi(q: u64, a: i64, b: &[i64], params: FormParams) -> Result<Complex64> {
    if b.len() != params.d() as usize {
        return Err(Error::domain(format!(
            "frequency vector has length {}, expected d = {}",
            b.len(),
            params.d()
        )));
    }
    check(q, a)?;
    let powers = power_residues(q, params.k());
    Ok(b.iter().map(|&bj| sum_with(q, a, bj, &powers)).product())
}

/// `(Σ_{b ∈ ℤ_q} e_q(-mb) G(q; a, b), e_q(a m^k))`; the two agree exactly.
pub fn gauss_fourier_check(q: u64, a: i64, m: i64, k: u32) -> Result<(Complex64, Complex64)> {
    let row = gauss_row(q, a, k)?;
    let lhs: Complex64 = row
        .iter()
        .enumerate()
        .map(|(b, g)| e_q(-(m as i128) * b as i128, q) * g)
        .sum();
    let mm = (m as i128).rem_euclid(q as i128) as u64;
    let rhs = e_q(a as i128 * pow_mod(mm, k, q) as i128, q);
    Ok((lhs, rhs))
}
