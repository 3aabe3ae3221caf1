//! Oscillatory integrals: `v_N(θ, ξ)`, `J_λ(η)` and the Fourier transform of
//! the continuous surface measure on `t_1^k + ... + t_d^k = λ`, `t ≥ 0`.
//!
//! `J_λ` is evaluated by integrating over the surface directly (a nested
//! radial recursion, one coordinate at a time) rather than through the
//! `θ`-integral, whose tail decays only like `Θ^{1-d/k}`. The `θ`-route is
//! kept as [`j_lambda_theta`] for cross-checks where `d/k` is large.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::FormParams;
use crate::phase::e;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Maximal phase change per panel, in turns.
    pub phase_budget: f64,
    /// Absolute truncation tolerance for the `θ`-route of `J_λ`.
    pub tail_tolerance: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 12,
            phase_budget: 0.125,
            tail_tolerance: 1e-9,
            max_panels: 1 << 22,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 4 {
            return Err(Error::domain(format!("panel order {} < 4", self.order)));
        }
        if !(self.phase_budget > 0.0 && self.phase_budget <= 0.25) {
            return Err(Error::domain(format!(
                "phase budget {} outside (0, 1/4]",
                self.phase_budget
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::domain("tail tolerance must be positive"));
        }
        if self.max_panels == 0 {
            return Err(Error::domain("panel cap must be positive"));
        }
        Ok(())
    }

    fn check_panels(&self, what: &'static str, panels: f64) -> Result<()> {
        if !(panels <= self.max_panels as f64) {
            return Err(Error::CapExceeded {
                what,
                requested: format!("{panels:.3e} panels"),
                cap: self.max_panels.to_string(),
            });
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub(crate) fn unit_rule(order: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(NonZeroUsize::new(order.max(1)).expect("nonzero"));
    gl.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0))
        .collect()
}

fn panel_end(t1: f64, n: f64, a: f64, b: f64, k: i32, budget: f64) -> f64 {
    let g = |t: f64| a * (t.powi(k) - t1.powi(k)) + b * (t - t1) - budget;
    if g(n) <= 0.0 {
        return n;
    }
    let mut t = n;
    if b > 0.0 {
        t = t.min(t1 + budget / b);
    }
    if a > 0.0 {
        t = t.min((t1.powi(k) + budget / a).powf(1.0 / k as f64));
    }
    // g is convex and increasing, so Newton from the right decreases monotonically.
    for _ in 0..60 {
        let gt = g(t);
        if gt <= 0.0 {
            break;
        }
        let dg = a * k as f64 * t.powi(k - 1) + b;
        let next = t - gt / dg;
        if !(next < t) || t - next <= 1e-15 * t.max(1.0) {
            break;
        }
        t = next;
    }
    if t <= t1 {
        // Phase changes faster than f64 can resolve; force progress.
        t = t1 + f64::EPSILON * t1.max(1.0);
    }
    t.min(n)
}

/// `v_N(θ, ξ) = ∫_0^N e(θt^k + ξt) dt`.
///
/// `[0, N]` is cut into panels on which `|θ|(t₂^k − t₁^k) + |ξ|(t₂ − t₁)` is
/// at most `phase_budget`, each integrated with a fixed Gauss–Legendre rule.
pub fn v_n(theta: f64, xi: f64, n: f64, k: u32, spec: &QuadratureSpec) -> Result<Complex64> {
    spec.validate()?;
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain(format!("N must be positive and finite, got {n}")));
    }
    if k == 0 || !theta.is_finite() || !xi.is_finite() {
        return Err(Error::domain("k must be positive and θ, ξ finite"));
    }
    let ki = k as i32;
    let (a, b) = (theta.abs(), xi.abs());
    let variation = a * n.powi(ki) + b * n;
    spec.check_panels("v_N panels", (variation / spec.phase_budget).ceil() + 1.0)?;
    let rule = unit_rule(spec.order);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut t1 = 0.0;
    let mut panels = 0usize;
    while t1 < n {
        let t2 = panel_end(t1, n, a, b, ki, spec.phase_budget);
        let h = t2 - t1;
        let mut part = Complex64::new(0.0, 0.0);
        for &(x, w) in &rule {
            let t = t1 + h * x;
            part += w * e(theta * t.powi(ki) + xi * t);
        }
        sum += part * h;
        t1 = t2;
        panels += 1;
        if panels > spec.max_panels {
            return Err(Error::CapExceeded {
                what: "v_N panels",
                requested: format!("> {panels}"),
                cap: spec.max_panels.to_string(),
            });
        }
    }
    Ok(sum)
}

/// `|v_N|·(1 + N|ξ| + N^k|θ|)^{1/k} / N`.
pub fn vn_basic_ratio(theta: f64, xi: f64, n: f64, k: u32, spec: &QuadratureSpec) -> Result<f64> {
    let v = v_n(theta, xi, n, k, spec)?;
    Ok(v.norm() * (1.0 + n * xi.abs() + n.powi(k as i32) * theta.abs()).powf(1.0 / k as f64) / n)
}

/// `|v_N|·(1 + N|ξ|)^{1/2} / N`.
pub fn check_vn_bound2(theta: f64, xi: f64, n: f64, k: u32, spec: &QuadratureSpec) -> Result<f64> {
    let v = v_n(theta, xi, n, k, spec)?;
    Ok(v.norm() * (1.0 + n * xi.abs()).sqrt() / n)
}

/// A weight `w(x) = Σ c·e(βx)` attached to one coordinate of the surface.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Wave(pub Vec<(Complex64, f64)>);

impl Wave {
    pub(crate) fn pure(beta: f64) -> Self {
        Wave(vec![(Complex64::new(1.0, 0.0), beta)])
    }

    fn eval(&self, x: f64) -> Complex64 {
        self.0.iter().map(|&(c, b)| c * e(b * x)).sum()
    }

    fn bandwidth(&self) -> f64 {
        self.0.iter().map(|&(_, b)| b.abs()).fold(0.0, f64::max)
    }
}

/// Chebyshev interpolant on `[0, 1]`.
struct Cheb {
    coeffs: Vec<Complex64>,
}

impl Cheb {
    fn fit(n: usize, f: impl Fn(f64) -> Complex64 + Sync) -> Cheb {
        let nf = n as f64;
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = (std::f64::consts::PI * (i as f64 + 0.5) / nf).cos();
                f((1.0 + x) / 2.0)
            })
            .collect();
        let coeffs = (0..n)
            .map(|j| {
                let s: Complex64 = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v * (std::f64::consts::PI * j as f64 * (i as f64 + 0.5) / nf).cos()
                    })
                    .sum();
                let scale = if j == 0 { 1.0 / nf } else { 2.0 / nf };
                s * scale
            })
            .collect();
        Cheb { coeffs }
    }

    fn eval(&self, r: f64) -> Complex64 {
        let x = 2.0 * r - 1.0;
        let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * x - b2
    }
}

fn cheb_degree(bandwidth: f64) -> usize {
    (1.2 * std::f64::consts::PI * bandwidth).ceil() as usize + 32
}

/// `∫ Π_j w_j(u_j) δ(Σ u_j^k − 1) du` over the positive orthant.
///
/// With `H_1(r) = w_1(r)/k` and
/// `H_m(r) = ∫_0^1 w_m(rs)(1−s^k)^{(m−1)/k−1} H_{m−1}(r(1−s^k)^{1/k}) ds`
/// the value is `H_d(1)`. The endpoint singularity is removed by `1 − s = v^k`
/// and each `H_m` is carried as a Chebyshev interpolant in `r`.
pub(crate) fn radial_surface_transform(
    waves: &[Wave],
    k: u32,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    spec.validate()?;
    if waves.is_empty() || k == 0 {
        return Err(Error::domain("need at least one coordinate and k >= 1"));
    }
    let kf = k as f64;
    let mut order: Vec<&Wave> = waves.iter().collect();
    order.sort_by(|a, b| a.bandwidth().total_cmp(&b.bandwidth()));
    if order.len() == 1 {
        return Ok(order[0].eval(1.0) / kf);
    }
    let rule = unit_rule(spec.order.max(16));
    let first = order[0];
    let mut cumulative = first.bandwidth();
    let mut h = Cheb::fit(cheb_degree(cumulative), |r| first.eval(r) / kf);
    let d = order.len();
    for (idx, wave) in order.iter().enumerate().skip(1) {
        let m = idx + 1;
        let alpha = (m as f64 - 1.0) / kf - 1.0;
        let turns = kf * wave.bandwidth() + 2.0 * cumulative;
        let panels = (turns / (8.0 * spec.phase_budget)).ceil() + 2.0;
        spec.check_panels("surface-transform panels", panels)?;
        let panels = panels as usize;
        // (s, radial factor, weight) for every node of every panel in v.
        let nodes: Vec<(f64, f64, f64)> = (0..panels)
            .flat_map(|p| {
                let lo = p as f64 / panels as f64;
                let width = 1.0 / panels as f64;
                rule.iter().map(move |&(x, w)| (lo + width * x, w * width))
            })
            .map(|(v, w)| {
                let s = 1.0 - v.powi(k as i32);
                let p: f64 = (0..k).map(|i| s.powi(i as i32)).sum();
                let weight = w * kf * v.powi(m as i32 - 2) * p.powf(alpha);
                (s, v * p.powf(1.0 / kf), weight)
            })
            .collect();
        let inner = &h;
        let integral = |r: f64| -> Complex64 {
            nodes
                .iter()
                .map(|&(s, rad, w)| wave.eval(r * s) * inner.eval(r * rad) * w)
                .sum()
        };
        if m == d {
            return Ok(integral(1.0));
        }
        cumulative += wave.bandwidth();
        h = Cheb::fit(cheb_degree(cumulative), integral);
    }
    unreachable!("loop returns at the last coordinate")
}

fn check_surface_preconditions(eta: &[f64], lambda: f64, params: FormParams) -> Result<()> {
    if eta.len() != params.d() as usize {
        return Err(Error::domain(format!(
            "η has {} coordinates, expected d = {}",
            eta.len(),
            params.d()
        )));
    }
    if params.d() <= params.k() {
        return Err(Error::domain(format!(
            "d = {} <= k = {}: the θ-integral is not absolutely convergent",
            params.d(),
            params.k()
        )));
    }
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("λ must be >= 1, got {lambda}")));
    }
    if eta.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("η must be finite"));
    }
    Ok(())
}

/// `d̃σ_λ(η) = λ^{1−d/k} J_λ(η)`.
pub fn sigma_hat(
    eta: &[f64],
    lambda: f64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    check_surface_preconditions(eta, lambda, params)?;
    let n = lambda.powf(1.0 / params.k() as f64);
    let waves: Vec<Wave> = eta.iter().map(|&x| Wave::pure(n * x)).collect();
    radial_surface_transform(&waves, params.k(), spec)
}

/// `J_λ(η) = ∫_ℝ Π_j v_N(θ, η_j) e(−λθ) dθ` with `N = λ^{1/k}`.
pub fn j_lambda(
    eta: &[f64],
    lambda: f64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let s = sigma_hat(eta, lambda, params, spec)?;
    Ok(s / params.normalisation(lambda))
}

/// `Γ(1+1/k)^d / Γ(d/k)`, the value of `d̃σ_λ(0)`.
pub fn surface_mass(params: FormParams) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let (k, d) = (params.k() as f64, params.d() as f64);
    (d * ln_gamma(1.0 + 1.0 / k) - ln_gamma(d / k)).exp()
}

/// `J_λ` through the truncated `θ`-integral.
///
/// Scaled form: `J_λ(η) = λ^{d/k−1} ∫ Π_j V(τ, Nη_j) e(−τ) dτ` with
/// `V(τ, β) = ∫_0^1 e(τs^k + βs) ds`. The range `|τ| ≤ T` is chosen so that
/// `4(1+T)^{1−d/k}/(d/k−1) ≤ tail_tolerance`. Practical only when `d/k` is
/// well above 1; otherwise the panel cap refuses.
pub fn j_lambda_theta(
    eta: &[f64],
    lambda: f64,
    params: FormParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    spec.validate()?;
    check_surface_preconditions(eta, lambda, params)?;
    let (k, d) = (params.k(), params.d() as usize);
    let excess = d as f64 / k as f64 - 1.0;
    let t_max = ((spec.tail_tolerance * excess / 4.0).powf(-1.0 / excess) - 1.0).max(1.0);
    let width = 8.0 * spec.phase_budget / (1.0 + d as f64);
    let panels = (t_max / width).ceil();
    let inner_panels = (t_max + eta.iter().map(|x| x.abs()).sum::<f64>()) / spec.phase_budget;
    spec.check_panels("θ-route panels", panels * (1.0 + inner_panels / 64.0))?;
    let n = lambda.powf(1.0 / k as f64);
    let beta: Vec<f64> = eta.iter().map(|&x| n * x).collect();
    let symmetric = beta.iter().all(|&b| b == 0.0);
    let rule = unit_rule(spec.order);
    let panels = panels as usize;
    let integrand = |tau: f64| -> Result<Complex64> {
        let mut prod = e(-tau);
        for &b in &beta {
            prod *= v_n(tau, b, 1.0, k, spec)?;
        }
        Ok(prod)
    };
    let range: Vec<i64> = if symmetric {
        (0..panels as i64).collect()
    } else {
        (-(panels as i64)..panels as i64).collect()
    };
    let parts: Vec<Complex64> = range
        .par_iter()
        .map(|&p| {
            let lo = p as f64 * width;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, w) in &rule {
                acc += integrand(lo + width * x)? * (w * width);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total: Complex64 = parts.iter().sum();
    let scaled = if symmetric {
        Complex64::new(2.0 * total.re, 0.0)
    } else {
        total
    };
    Ok(scaled / params.normalisation(lambda))
}
