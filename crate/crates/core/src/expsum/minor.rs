use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::arcs::ArcDissection;
use crate::error::{Error, Result};
use crate::phase::Turns;

/// Controls the approximation of `sup_ξ |S_N(θ, ξ)|`.
///
/// A coarse equispaced `ξ`-grid (at least `grid` points, and at least twice
/// the number of terms so the peaks of width `~1/N` are resolved) is
/// evaluated by one FFT; the `refine_top` largest grid values are then
/// polished by golden-section search. The result is a lower bound on the
/// true supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupConfig {
    pub grid: usize,
    pub refine_top: usize,
    pub golden_iters: usize,
}

impl Default for SupConfig {
    fn default() -> Self {
        SupConfig {
            grid: 256,
            refine_top: 3,
            golden_iters: 48,
        }
    }
}

struct SupEvaluator {
    n: u64,
    k: u32,
    size: usize,
    fft: Arc<dyn Fft<f64>>,
    cfg: SupConfig,
}

impl SupEvaluator {
    fn new(n: u64, k: u32, cfg: SupConfig) -> Self {
        let terms = 2 * n as usize + 1;
        let size = cfg.grid.max(2 * terms).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_inverse(size);
        SupEvaluator {
            n,
            k,
            size,
            fft,
            cfg,
        }
    }

    /// `c_m = e(θm^k)` for `m = 0..=N`; the sum is even in `m`.
    fn coefficients(&self, theta: Turns) -> Vec<Complex64> {
        (0..=self.n).map(|m| theta.mul_pow(m, self.k).exp()).collect()
    }

    /// `|c_0 + 2 Σ_{m ≥ 1} c_m cos(2πmξ)|`, with `cos(2πmξ)` taken from the
    /// powers of `e(ξ)` (rounding drift grows like `m·ε`).
    fn eval_at(&self, coeffs: &[Complex64], xi: f64) -> f64 {
        let z = Turns::from_f64(xi).exp();
        let mut w = z;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &coeffs[1..] {
            acc += c * w.re;
            w *= z;
        }
        (coeffs[0] + acc * 2.0).norm()
    }

    fn sup(&self, theta: f64) -> (f64, f64) {
        let coeffs = self.coefficients(Turns::from_f64(theta));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        let size = self.size as i64;
        buf[0] = coeffs[0];
        for (m, c) in coeffs.iter().enumerate().skip(1) {
            let m = m as i64;
            buf[m.rem_euclid(size) as usize] += c;
            buf[(-m).rem_euclid(size) as usize] += c;
        }
        self.fft.process(&mut buf);
        let mags: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
        let by_size = |a: &usize, b: &usize| mags[*b].total_cmp(&mags[*a]).then(a.cmp(b));
        let mut order: Vec<usize> = (0..self.size).collect();
        let top = self.cfg.refine_top.clamp(1, self.size);
        if top < self.size {
            order.select_nth_unstable_by(top - 1, by_size);
        }
        order.truncate(top);
        order.sort_by(by_size);
        let step = 1.0 / self.size as f64;
        let mut best = (mags[order[0]], order[0] as f64 * step);
        for &j in &order {
            let center = j as f64 * step;
            let (v, x) = golden_max(
                |xi| self.eval_at(&coeffs, xi),
                center - step,
                center + step,
                self.cfg.golden_iters,
            );
            if v > best.0 {
                best = (v, x - x.floor());
            }
        }
        best
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (f1, x1)
    } else {
        (f2, x2)
    }
}

/// `(sup_ξ |S_N(θ, ξ)|, argmax ξ)`, approximated from below.
pub fn sup_over_xi(theta: f64, n: u64, k: u32, cfg: SupConfig) -> (f64, f64) {
    SupEvaluator::new(n, k, cfg).sup(theta)
}

/// How `ξ` is sampled in a minor-arc scan.
#[derive(Debug, Clone, PartialEq)]
pub enum XiSampling {
    /// Evaluate `|S_N|` exactly at these points.
    Points(Vec<f64>),
    /// Approximate the supremum over all `ξ`.
    Refined(SupConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupScan {
    pub n: u64,
    pub sup: f64,
    pub theta_at: f64,
    pub xi_at: f64,
    pub accepted: usize,
    pub rejected: usize,
}

/// Max of `|S_N(θ, ξ)|` over sampled `θ` on the minor arcs.
pub fn minor_arc_sup_scan(
    n: u64,
    k: u32,
    theta_samples: &[f64],
    xi: &XiSampling,
    dissection: &ArcDissection,
) -> Result<SupScan> {
    let minor: Vec<f64> = theta_samples
        .iter()
        .copied()
        .filter(|&t| dissection.classify(t).is_minor())
        .collect();
    if minor.is_empty() {
        return Err(Error::EmptySample(format!(
            "none of {} θ-samples lie on the minor arcs at level {}",
            theta_samples.len(),
            dissection.level()
        )));
    }
    let per_theta: Vec<(f64, f64)> = match xi {
        XiSampling::Points(points) => {
            if points.is_empty() {
                return Err(Error::EmptySample("no ξ-samples".into()));
            }
            minor
                .par_iter()
                .map(|&t| {
                    let ev = SupEvaluator::new(n, k, SupConfig::default());
                    let coeffs = ev.coefficients(Turns::from_f64(t));
                    points
                        .iter()
                        .map(|&x| (ev.eval_at(&coeffs, x), x))
                        .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
                })
                .collect()
        }
        XiSampling::Refined(cfg) => {
            let ev = SupEvaluator::new(n, k, *cfg);
            minor.par_iter().map(|&t| ev.sup(t)).collect()
        }
    };
    let mut best = SupScan {
        n,
        sup: f64::NEG_INFINITY,
        theta_at: 0.0,
        xi_at: 0.0,
        accepted: minor.len(),
        rejected: theta_samples.len() - minor.len(),
    };
    for (&t, &(v, x)) in minor.iter().zip(&per_theta) {
        if v > best.sup {
            best.sup = v;
            best.theta_at = t;
            best.xi_at = x;
        }
    }
    Ok(best)
}

/// The `θ`-set integrated over.
#[derive(Debug, Clone, Copy)]
pub enum IntegralDomain<'a> {
    FullCircle,
    MinorArcs(&'a ArcDissection),
    /// Closed sub-intervals of `[0, 1)`.
    Intervals(&'a [(f64, f64)]),
}

impl IntegralDomain<'_> {
    fn contains(&self, theta: f64) -> bool {
        match self {
            IntegralDomain::FullCircle => true,
            IntegralDomain::MinorArcs(d) => d.classify(theta).is_minor(),
            IntegralDomain::Intervals(iv) => iv.iter().any(|&(lo, hi)| lo <= theta && theta <= hi),
        }
    }
}

fn required_resolution(n: u64, k: u32) -> u64 {
    8 * k as u64 * n.saturating_pow(k - 1)
}

/// Riemann estimate of `∫_𝔅 sup_ξ |S_N(θ, ξ)|^r dθ` on a uniform `θ`-grid.
///
/// Approximate: the supremum is a lower bound and the integral a Riemann sum.
pub fn mean_value_integral_estimate(
    r: f64,
    k: u32,
    n: u64,
    domain: IntegralDomain<'_>,
    grid_resolution: usize,
    cfg: SupConfig,
) -> Result<f64> {
    if !(r >= 2.0) {
        return Err(Error::domain(format!("exponent r must be >= 2, got {r}")));
    }
    let need = required_resolution(n, k);
    if (grid_resolution as u64) < need {
        return Err(Error::domain(format!(
            "θ-grid of {grid_resolution} points is coarser than the arc scale (need >= 8kN^(k-1) = {need})"
        )));
    }
    let ev = SupEvaluator::new(n, k, cfg);
    let m = grid_resolution;
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let theta = i as f64 / m as f64;
            if domain.contains(theta) {
                ev.sup(theta).0.powf(r)
            } else {
                0.0
            }
        })
        .collect();
    Ok(values.iter().sum::<f64>() / m as f64)
}

/// Riemann estimate of `∫_𝔅 ∫_𝕋 |S_N(θ, ξ)|^r dξ dθ`.
///
/// With `r = 2`, `𝔅 = 𝕋` and grids finer than the frequency ranges this is
/// exactly `2N + 1`.
pub fn mean_value_integral_xi_averaged(
    r: f64,
    k: u32,
    n: u64,
    domain: IntegralDomain<'_>,
    m_theta: usize,
    m_xi: usize,
) -> Result<f64> {
    if m_theta == 0 || m_xi == 0 {
        return Err(Error::domain("grids must be non-empty"));
    }
    let fft = FftPlanner::new().plan_fft_inverse(m_xi);
    let ni = n as i64;
    let values: Vec<f64> = (0..m_theta)
        .into_par_iter()
        .map(|i| {
            let theta = i as f64 / m_theta as f64;
            if !domain.contains(theta) {
                return 0.0;
            }
            let t = Turns::from_ratio(i as i128, m_theta as u128);
            let mut buf = vec![Complex64::new(0.0, 0.0); m_xi];
            for m in -ni..=ni {
                buf[m.rem_euclid(m_xi as i64) as usize] += t.mul_pow(m.unsigned_abs(), k).exp();
            }
            fft.process(&mut buf);
            buf.iter().map(|z| z.norm().powf(r)).sum::<f64>() / m_xi as f64
        })
        .collect();
    Ok(values.iter().sum::<f64>() / m_theta as f64)
}
