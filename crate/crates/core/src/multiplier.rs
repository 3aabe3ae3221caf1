//! The exact multiplier `Â_λ(ξ) = λ^{1−d/k} Σ_{f(x)=λ} e(x·ξ)`, its main-term
//! approximation by Gauss sums and `d̃σ_λ`, the error field, and the
//! truncated singular series.

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{gauss_row, gauss_sum, gauss_sum_multi};
use crate::expsum::{mean_value_integral_estimate, IntegralDomain, SupConfig};
use crate::lattice::{enumerate_solutions, EnumerationMode};
use crate::oscillatory::{radial_surface_transform, sigma_hat, QuadratureSpec, Wave};
use crate::params::FormParams;
use crate::phase::{e_q, Turns};
use crate::stats::loglog_slope;

/// Largest `λ` accepted by the factored evaluation (dense tables of length `λ + 1`).
pub const FACTORED_LAMBDA_CAP: u64 = 1 << 26;

fn h(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// The one-dimensional bump `φ`: `1` on `|t| ≤ 1/8`, `0` on `|t| ≥ 1/4`,
/// smooth and even.
pub fn bump(t: f64) -> f64 {
    let s = (0.25 - t.abs()) / 0.125;
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        h(s) / (h(s) + h(1.0 - s))
    }
}

/// `ψ(u) = Π_j φ(u_j)`.
pub fn psi(u: &[f64]) -> f64 {
    u.iter().map(|&t| bump(t)).product()
}

/// Integers `b` with `φ(t − b) > 0`, paired with that value. At most two.
pub fn bump_support(t: f64) -> Vec<(i64, f64)> {
    let lo = (t - 0.25).floor() as i64;
    let hi = (t + 0.25).ceil() as i64;
    (lo..=hi)
        .map(|b| (b, bump(t - b as f64)))
        .filter(|&(_, v)| v > 0.0)
        .collect()
}

fn check_lambda_xi(lambda: u64, xi: &[f64], params: FormParams) -> Result<()> {
    if lambda == 0 {
        return Err(Error::domain("λ must be >= 1"));
    }
    if xi.len() != params.d() as usize {
        return Err(Error::domain(format!(
            "ξ has {} coordinates, expected d = {}",
            xi.len(),
            params.d()
        )));
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("ξ must be finite"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AhatMethod {
    /// Sum over the enumerated solution list.
    Direct,
    /// Join two half generating functions at total value `λ`.
    Factored,
}

/// `Â_λ(ξ)` by the factored evaluation.
pub fn a_hat(lambda: u64, xi: &[f64], params: FormParams) -> Result<Complex64> {
    a_hat_with(lambda, xi, params, AhatMethod::Factored)
}

pub fn a_hat_with(
    lambda: u64,
    xi: &[f64],
    params: FormParams,
    method: AhatMethod,
) -> Result<Complex64> {
    check_lambda_xi(lambda, xi, params)?;
    let raw = match method {
        AhatMethod::Direct => direct_sum(lambda, xi, params)?,
        AhatMethod::Factored => factored_sum(lambda, xi, params)?,
    };
    Ok(raw * params.normalisation(lambda as f64))
}

fn direct_sum(lambda: u64, xi: &[f64], params: FormParams) -> Result<Complex64> {
    let set = enumerate_solutions(params, lambda, EnumerationMode::Full)?;
    let turns: Vec<Turns> = xi.iter().map(|&x| Turns::from_f64(x)).collect();
    let points = set.points().expect("full enumeration lists points");
    Ok(points
        .iter()
        .map(|x| {
            x.iter()
                .zip(&turns)
                .fold(Turns(0), |acc, (&xj, t)| acc + t.mul_int(xj))
                .exp()
        })
        .sum())
}

/// `F(s) = Σ_{x ∈ ℤ^m, f(x) = s} e(x·ξ)` for `s ≤ λ`, built one coordinate
/// at a time from `f_j(0) = 1`, `f_j(n^k) = 2cos(2πnξ_j)`.
fn half_series(k: u32, lambda: u64, xi: &[f64]) -> Vec<Complex64> {
    let len = lambda as usize + 1;
    let mut table = vec![Complex64::new(0.0, 0.0); len];
    table[0] = Complex64::new(1.0, 0.0);
    let n_max = crate::params::integer_root(lambda, k);
    for &x in xi {
        let t = Turns::from_f64(x);
        let terms: Vec<(usize, Complex64)> = (1..=n_max)
            .map(|n| {
                let z = t.mul_u64(n).exp();
                (n.pow(k) as usize, z + z.conj())
            })
            .collect();
        let mut next = table.clone();
        for (p, c) in &terms {
            for s in *p..len {
                next[s] += table[s - p] * c;
            }
        }
        table = next;
    }
    table
}

fn factored_sum(lambda: u64, xi: &[f64], params: FormParams) -> Result<Complex64> {
    if lambda > FACTORED_LAMBDA_CAP {
        return Err(Error::CapExceeded {
            what: "factored multiplier table length",
            requested: lambda.to_string(),
            cap: FACTORED_LAMBDA_CAP.to_string(),
        });
    }
    let split = xi.len() / 2;
    let k = params.k();
    let (f1, f2) = rayon::join(
        || half_series(k, lambda, &xi[..split]),
        || half_series(k, lambda, &xi[split..]),
    );
    let l = lambda as usize;
    Ok((0..=l).map(|s| f1[s] * f2[l - s]).sum())
}

/// Default major-arc range `q ≤ ⌊λ^{1/k}⌋`.
pub fn default_q_max(lambda: u64, params: FormParams) -> u64 {
    params.root_floor(lambda).max(1)
}

fn check_main(lambda: u64, xi: &[f64], q_max: u64, params: FormParams) -> Result<()> {
    check_lambda_xi(lambda, xi, params)?;
    if q_max == 0 {
        return Err(Error::domain("q_max must be >= 1"));
    }
    if params.d() <= params.k() {
        return Err(Error::domain(format!(
            "main term needs d > k, got d = {}, k = {}",
            params.d(),
            params.k()
        )));
    }
    Ok(())
}

fn units(q: u64) -> impl Iterator<Item = i64> {
    (0..q).filter(move |&a| a.gcd(&q) == 1).map(|a| a as i64)
}

/// Truncated main term
/// `Σ_{q ≤ q_max} Σ_{a ∈ ℤ_q^*} e_q(−λa) Σ_w Σ_b G(q;a,wb) ψ(qξ−b) d̃σ_λ(w(ξ−b/q))`.
///
/// The sign and frequency sums are collapsed into one weight per coordinate,
/// `Σ_b φ(qξ_j − b)[G(q;a,b)e(β_b u) + G(q;a,−b)e(−β_b u)]` with
/// `β_b = λ^{1/k}(ξ_j − b/q)`, which is then integrated over the surface.
pub fn main_term(
    lambda: u64,
    xi: &[f64],
    q_max: u64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    check_main(lambda, xi, q_max, params)?;
    let k = params.k();
    let n = (lambda as f64).powf(1.0 / k as f64);
    let per_q: Vec<Complex64> = (1..=q_max)
        .into_par_iter()
        .map(|q| -> Result<Complex64> {
            let supports: Vec<Vec<(i64, f64)>> =
                xi.iter().map(|&x| bump_support(q as f64 * x)).collect();
            if supports.iter().any(Vec::is_empty) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for a in units(q) {
                let row = gauss_row(q, a, k)?;
                let g = |b: i64| row[b.rem_euclid(q as i64) as usize];
                let waves: Vec<Wave> = supports
                    .iter()
                    .zip(xi)
                    .map(|(sup, &x)| {
                        let mut terms = Vec::with_capacity(2 * sup.len());
                        for &(b, phi) in sup {
                            let beta = n * (x - b as f64 / q as f64);
                            terms.push((g(b) * phi, beta));
                            terms.push((g(-b) * phi, -beta));
                        }
                        Wave(terms)
                    })
                    .collect();
                let surface = radial_surface_transform(&waves, k, spec)?;
                acc += e_q(-(lambda as i128) * a as i128, q) * surface;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(per_q.iter().sum())
}

/// The same truncated main term as [`main_term`], summed literally over every
/// sign pattern `w ∈ {±1}^d` and frequency vector `b`. Cost grows like `2^d`.
pub fn main_term_literal(
    lambda: u64,
    xi: &[f64],
    q_max: u64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    check_main(lambda, xi, q_max, params)?;
    let d = xi.len();
    let mut total = Complex64::new(0.0, 0.0);
    for q in 1..=q_max {
        let qf = q as f64;
        let supports: Vec<Vec<(i64, f64)>> = xi.iter().map(|&x| bump_support(qf * x)).collect();
        if supports.iter().any(Vec::is_empty) {
            continue;
        }
        let mut bvecs: Vec<Vec<i64>> = vec![Vec::new()];
        for sup in &supports {
            bvecs = bvecs
                .into_iter()
                .flat_map(|v| {
                    sup.iter().map(move |&(b, _)| {
                        let mut w = v.clone();
                        w.push(b);
                        w
                    })
                })
                .collect();
        }
        for a in units(q) {
            let mut inner = Complex64::new(0.0, 0.0);
            for b in &bvecs {
                let shifted: Vec<f64> = xi.iter().zip(b).map(|(&x, &bj)| qf * x - bj as f64).collect();
                let weight = psi(&shifted);
                for mask in 0u32..(1 << d) {
                    let w: Vec<i64> = (0..d).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect();
                    let wb: Vec<i64> = w.iter().zip(b).map(|(s, bj)| s * bj).collect();
                    let eta: Vec<f64> = xi
                        .iter()
                        .zip(b)
                        .zip(&w)
                        .map(|((&x, &bj), &s)| s as f64 * (x - bj as f64 / qf))
                        .collect();
                    let g = gauss_sum_multi(q, a, &wb, params)?;
                    inner += g * weight * sigma_hat(&eta, lambda as f64, params, spec)?;
                }
            }
            total += e_q(-(lambda as i128) * a as i128, q) * inner;
        }
    }
    Ok(total)
}

/// One point of the error field `Ê_λ(ξ) = Â_λ(ξ) − main(ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierSample {
    pub lambda: u64,
    pub xi: Vec<f64>,
    pub a_hat: Complex64Ser,
    pub main: Complex64Ser,
    pub error: Complex64Ser,
    pub q_max: u64,
}

/// Serialisable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex64Ser {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex64Ser {
    fn from(z: Complex64) -> Self {
        Complex64Ser { re: z.re, im: z.im }
    }
}

impl From<Complex64Ser> for Complex64 {
    fn from(z: Complex64Ser) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl MultiplierSample {
    pub fn new(lambda: u64, xi: Vec<f64>, a_hat: Complex64, main: Complex64, q_max: u64) -> Self {
        MultiplierSample {
            lambda,
            xi,
            a_hat: a_hat.into(),
            main: main.into(),
            error: (a_hat - main).into(),
            q_max,
        }
    }

    pub fn error_abs(&self) -> f64 {
        Complex64::from(self.error).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorField {
    pub samples: Vec<MultiplierSample>,
    pub max_abs: f64,
    pub mean_abs: f64,
}

impl ErrorField {
    fn from_samples(samples: Vec<MultiplierSample>) -> Self {
        let abs: Vec<f64> = samples.iter().map(MultiplierSample::error_abs).collect();
        let max_abs = abs.iter().copied().fold(0.0, f64::max);
        let mean_abs = if abs.is_empty() {
            0.0
        } else {
            abs.iter().sum::<f64>() / abs.len() as f64
        };
        ErrorField {
            samples,
            max_abs,
            mean_abs,
        }
    }
}

fn sample_at(
    lambda: u64,
    xi: &[f64],
    q_max: u64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<MultiplierSample> {
    let a = a_hat(lambda, xi, params)?;
    let m = main_term(lambda, xi, q_max, params, spec)?;
    Ok(MultiplierSample::new(lambda, xi.to_vec(), a, m, q_max))
}

/// `Â`, main term and error at each `ξ`, in input order.
pub fn error_field(
    lambda: u64,
    xi_samples: &[Vec<f64>],
    q_max: u64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<ErrorField> {
    let samples = xi_samples
        .par_iter()
        .map(|xi| sample_at(lambda, xi, q_max, params, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorField::from_samples(samples))
}

/// Truncated singular series with its imaginary part kept as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularSeries {
    pub value: f64,
    pub imag: f64,
}

/// Precomputed `(q, a, G(q;a,0)^d)` for repeated evaluation of the singular series.
#[derive(Debug, Clone)]
pub struct SingularSeriesTerms {
    pub params: FormParams,
    pub q_max: u64,
    terms: Vec<(u64, i64, Complex64)>,
}

impl SingularSeriesTerms {
    pub fn new(q_max: u64, params: FormParams) -> Result<Self> {
        if params.d() < 2 * params.k() + 1 {
            return Err(Error::domain(format!(
                "singular series needs d >= 2k + 1, got d = {}, k = {}",
                params.d(),
                params.k()
            )));
        }
        if q_max == 0 {
            return Err(Error::domain("q_max must be >= 1"));
        }
        let per_q: Vec<Vec<(u64, i64, Complex64)>> = (1..=q_max)
            .into_par_iter()
            .map(|q| {
                units(q)
                    .map(|a| {
                        let g = gauss_sum(q, a, 0, params.k())?.value;
                        Ok((q, a, g.powu(params.d())))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(SingularSeriesTerms {
            params,
            q_max,
            terms: per_q.into_iter().flatten().collect(),
        })
    }

    /// `Σ_{q ≤ q_max} Σ_{a ∈ ℤ_q^*} e_q(−λa) G(q;a,0)^d`.
    pub fn eval(&self, lambda: u64) -> SingularSeries {
        let z: Complex64 = self
            .terms
            .iter()
            .map(|&(q, a, g)| e_q(-(lambda as i128) * a as i128, q) * g)
            .sum();
        SingularSeries {
            value: z.re,
            imag: z.im,
        }
    }
}

pub fn singular_series(lambda: u64, q_max: u64, params: FormParams) -> Result<SingularSeries> {
    Ok(SingularSeriesTerms::new(q_max, params)?.eval(lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub big_lambda: u64,
    pub max_error: f64,
    pub mean_error: f64,
    pub worst_lambda: u64,
    pub worst_xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `log max|Ê|` against `log Λ`.
    pub slope: Option<f64>,
}

fn check_dyadic(lambdas: &[u64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::EmptySample("no dyadic scales given".into()));
    }
    for w in lambdas.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::domain("dyadic scales must be strictly increasing"));
        }
    }
    if let Some(bad) = lambdas.iter().find(|&&l| l < 2 || !l.is_power_of_two()) {
        return Err(Error::domain(format!("scale {bad} is not a power of two >= 2")));
    }
    Ok(())
}

/// Sampled `max |Ê_λ(ξ)|` per dyadic scale `Λ`, with `λ` drawn uniformly
/// from `[Λ/2, Λ)` and `ξ` from `[0,1)^d`, using the given error evaluator.
///
/// All samples are drawn from one seeded stream before any evaluation, so the
/// result does not depend on the worker count.
pub fn dyadic_error_decay_with<F>(
    lambdas: &[u64],
    samples: usize,
    params: FormParams,
    seed: u64,
    error: F,
) -> Result<DecayTable>
where
    F: Fn(u64, &[f64]) -> Result<Complex64> + Sync,
{
    check_dyadic(lambdas)?;
    if samples == 0 {
        return Err(Error::EmptySample("sample count is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = params.d() as usize;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &big in lambdas {
        let draws: Vec<(u64, Vec<f64>)> = (0..samples)
            .map(|_| {
                let l = rng.gen_range(big / 2..big);
                let xi = (0..d).map(|_| rng.gen::<f64>()).collect();
                (l, xi)
            })
            .collect();
        let values = draws
            .par_iter()
            .map(|(l, xi)| error(*l, xi).map(|z| z.norm()))
            .collect::<Result<Vec<f64>>>()?;
        let mut worst = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[worst] {
                worst = i;
            }
        }
        rows.push(DecayRow {
            big_lambda: big,
            max_error: values[worst],
            mean_error: values.iter().sum::<f64>() / values.len() as f64,
            worst_lambda: draws[worst].0,
            worst_xi: draws[worst].1.clone(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.big_lambda as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_error).collect();
    Ok(DecayTable {
        slope: loglog_slope(&xs, &ys),
        rows,
    })
}

/// [`dyadic_error_decay_with`] using the factored `Â` and the collapsed main
/// term; `q_max = None` means `⌊λ^{1/k}⌋` for each sampled `λ`.
pub fn dyadic_error_decay(
    lambdas: &[u64],
    samples: usize,
    q_max: Option<u64>,
    params: FormParams,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<DecayTable> {
    dyadic_error_decay_with(lambdas, samples, params, seed, |l, xi| {
        let q = q_max.unwrap_or_else(|| default_q_max(l, params));
        let s = sample_at(l, xi, q, params, spec)?;
        Ok(s.error.into())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSup {
    /// `∫_𝔅 sup_ξ |Π_j S_N(θ, ξ_j)| dθ`.
    pub integral: f64,
    /// `N^{k−d}` times the integral; `None` at `N = 0`.
    pub scaled: Option<f64>,
}

/// Riemann estimate of `∫_𝔅 sup_ξ |F_N(θ; ξ)| dθ` where
/// `F_N(θ; ξ) = Π_j S_N(θ, ξ_j)`, so the supremum is `(sup_ξ |S_N|)^d`.
pub fn kernel_sup_bound(
    domain: IntegralDomain<'_>,
    n: u64,
    params: FormParams,
    grid: usize,
    cfg: SupConfig,
) -> Result<KernelSup> {
    let integral =
        mean_value_integral_estimate(params.d() as f64, params.k(), n, domain, grid, cfg)?;
    let scaled = (n > 0).then(|| integral * (n as f64).powi(params.k() as i32 - params.d() as i32));
    Ok(KernelSup { integral, scaled })
}
