use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::Turns;

/// `S_N(θ, ξ) = Σ_{|n| <= N} e(θ|n|^k + ξn)`.
pub fn s_n(theta: f64, xi: f64, n: u64, k: u32) -> Complex64 {
    let t = Turns::from_f64(theta);
    let x = Turns::from_f64(xi);
    let mut acc = Complex64::new(1.0, 0.0);
    for m in 1..=n {
        let base = t.mul_pow(m, k);
        let lin = x.mul_u64(m);
        acc += (base + lin).exp() + (base - lin).exp();
    }
    acc
}

/// `S̃_N(θ, ξ) = Σ_{1 <= n <= N} e(θn^k + ξn)`.
pub fn s_n_one_sided(theta: f64, xi: f64, n: u64, k: u32) -> Complex64 {
    let t = Turns::from_f64(theta);
    let x = Turns::from_f64(xi);
    (1..=n)
        .map(|m| (t.mul_pow(m, k) + x.mul_u64(m)).exp())
        .sum()
}

/// `𝓕_N(θ; ξ) = Π_j S_N(θ, ξ_j)`.
pub fn f_n(theta: f64, xi: &[f64], n: u64, k: u32) -> Complex64 {
    xi.iter().map(|&x| s_n(theta, x, n, k)).product()
}

/// Leading phase `θ` on `n^k` plus lower-order phases `ξ_1, ..., ξ_l` on
/// `n, ..., n^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub theta: f64,
    pub xi: Vec<f64>,
}

impl PhaseVector {
    /// Reduces every entry to `[0, 1)`.
    pub fn new(theta: f64, xi: Vec<f64>) -> Self {
        let wrap = |x: f64| x - x.floor();
        PhaseVector {
            theta: wrap(theta),
            xi: xi.into_iter().map(wrap).collect(),
        }
    }
}

/// `Σ_{n=1}^N e(θn^k + ξ_l n^l + ... + ξ_1 n)`.
pub fn weyl_sum(phase: &PhaseVector, k: u32, n: u64) -> Result<Complex64> {
    if n < 1 {
        return Err(Error::domain("Weyl sums need N >= 1"));
    }
    if phase.xi.len() >= k as usize {
        return Err(Error::domain(format!(
            "lower-order phases must have degree < k = {k}, got {}",
            phase.xi.len()
        )));
    }
    let t = Turns::from_f64(phase.theta);
    let xs: Vec<Turns> = phase.xi.iter().map(|&x| Turns::from_f64(x)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..=n {
        let mut ph = t.mul_pow(m, k);
        for (j, x) in xs.iter().enumerate() {
            ph = ph + x.mul_pow(m, j as u32 + 1);
        }
        acc += ph.exp();
    }
    Ok(acc)
}
