//! Closed-form dimension thresholds and decay exponents.
//!
//! Everything here is evaluated in exact rational arithmetic so that the
//! tabulated thresholds come out as exact integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::FormParams;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Decimal approximation of an exact rational.
pub fn to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// `"num/den"` with the denominator omitted for integers.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn require_k3(k: u32) -> Result<()> {
    if k < 3 {
        return Err(Error::domain(format!(
            "threshold formulas need k >= 3 (the maximisation over 2 <= j <= k-1 is empty), got k = {k}"
        )));
    }
    Ok(())
}

/// The quantity `(kj - min(2^j + 2, j^2 + j)) / (k - j + 1)` maximised in `d0`.
fn saving_term(k: u32, j: u32) -> BigRational {
    let (k, j) = (k as i64, j as i64);
    let pow = 2i64.checked_pow(j as u32).map(|p| p + 2).unwrap_or(i64::MAX);
    let m = pow.min(j * j + j);
    rat(k * j - m, k - j + 1)
}

/// `d0(k)` together with its maximising index `l0(k)` (smallest on ties).
pub fn d0_with_maximizer(k: u32) -> Result<(BigRational, u32)> {
    require_k3(k)?;
    let mut best: Option<(BigRational, u32)> = None;
    for j in 2..k {
        let v = saving_term(k, j);
        match &best {
            Some((b, _)) if v <= *b => {}
            _ => best = Some((v, j)),
        }
    }
    let (m, j) = best.expect("k >= 3 gives a non-empty range");
    Ok((int((k as i64) * (k as i64)) - m, j))
}

pub fn d0(k: u32) -> Result<BigRational> {
    d0_with_maximizer(k).map(|(v, _)| v)
}

pub fn l0(k: u32) -> Result<u32> {
    d0_with_maximizer(k).map(|(_, j)| j)
}

/// `1 + floor(d0(k))`: the least dimension covered at `p = 2`.
pub fn d0_star(k: u32) -> Result<u32> {
    let v = d0(k)?;
    let f = v.floor().to_integer();
    Ok(1 + f.to_u32().expect("d0 fits in u32 for sane k"))
}

/// `τ_k = max(2^{1-k}, 1/(k^2 - k))`.
pub fn tau(k: u32) -> BigRational {
    let a = BigRational::new(BigInt::one(), BigInt::from(2u32).pow(k - 1));
    let kk = k as i64;
    let b = rat(1, kk * kk - kk);
    if a > b {
        a
    } else {
        b
    }
}

/// Which branch of the piecewise `δ0` formula applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaRegime {
    /// `d < d0`: first branch extended below the threshold, value `<= 0`.
    BelowThreshold,
    /// `d0 <= d <= k^2 + k`.
    Interpolating,
    /// `d > k^2 + k`.
    Saturating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delta0 {
    pub value: BigRational,
    pub regime: DeltaRegime,
}

pub fn delta0(params: FormParams) -> Result<Delta0> {
    let k = params.k();
    let d0v = d0(k)?;
    let kk = k as i64;
    let d = int(params.d() as i64);
    let top = int(kk * kk + kk);
    let kr = int(kk);
    let (value, regime) = if d > top {
        let v = (BigRational::one() + (&d - &top) * tau(k)) / &kr;
        (v, DeltaRegime::Saturating)
    } else {
        let v = (&d - &d0v) / (&top - &d0v) / &kr;
        let regime = if d < d0v {
            DeltaRegime::BelowThreshold
        } else {
            DeltaRegime::Interpolating
        };
        (v, regime)
    };
    Ok(Delta0 { value, regime })
}

/// `p0(d,k) = max(d/(d-k), 1 + 1/(1 + 2 δ0))`.
pub fn p0(params: FormParams) -> Result<BigRational> {
    let (d, k) = (params.d() as i64, params.k() as i64);
    require_k3(params.k())?;
    if d <= k {
        return Err(Error::domain(format!(
            "p0 needs d > k (d/(d-k) is undefined), got d = {d}, k = {k}"
        )));
    }
    let first = rat(d, d - k);
    let delta = delta0(params)?.value;
    let denom = BigRational::one() + int(2) * delta;
    if denom.is_zero() {
        return Ok(first);
    }
    let second = BigRational::one() + denom.recip();
    Ok(if first >= second { first } else { second })
}

/// `r1(k, l)`: the left end of the interpolation range.
pub fn r1(k: u32, l: u32) -> Result<BigRational> {
    require_k3(k)?;
    if l < 2 || l > k - 1 {
        return Err(Error::domain(format!("l must lie in [2, k-1], got l = {l} for k = {k}")));
    }
    Ok(int((k as i64) * (k as i64)) - saving_term(k, l))
}

/// The linear saving function with `δ(r1) = 0` and `δ(k^2 + k) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavingLine {
    pub r1: BigRational,
    pub top: BigRational,
}

impl SavingLine {
    pub fn new(k: u32, l: u32) -> Result<Self> {
        let r1 = r1(k, l)?;
        let kk = k as i64;
        Ok(SavingLine {
            r1,
            top: int(kk * kk + kk),
        })
    }

    pub fn eval(&self, r: &BigRational) -> BigRational {
        (r - &self.r1) / (&self.top - &self.r1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaP {
    pub value: BigRational,
    pub positive: bool,
}

/// `α_p = 2(1 + δ)(1 - 1/p) - 1`.
pub fn alpha_p(p: &BigRational, delta: &BigRational) -> Result<AlphaP> {
    if *p <= BigRational::one() || *p > int(2) {
        return Err(Error::domain(format!("p must lie in (1, 2], got {}", fmt_rational(p))));
    }
    if delta.is_negative() {
        return Err(Error::domain("delta must be >= 0"));
    }
    let value = int(2) * (BigRational::one() + delta) * (BigRational::one() - p.recip())
        - BigRational::one();
    let positive = value.is_positive();
    Ok(AlphaP { value, positive })
}

/// `γ = min(d/k - 2, 1/2)`.
pub fn gamma(params: FormParams) -> BigRational {
    let g = rat(params.d() as i64, params.k() as i64) - int(2);
    let half = rat(1, 2);
    if g < half {
        g
    } else {
        half
    }
}

/// Open-form major-arc exponent `2γ(p - p1) / (k p (2 - p1))`, `p1 = d/(d-k)`.
///
/// A formula evaluation only; no sharpness is implied.
pub fn beta_p(params: FormParams, p: &BigRational) -> Result<BigRational> {
    let (d, k) = (params.d() as i64, params.k() as i64);
    if d <= k {
        return Err(Error::domain("beta_p needs d > k"));
    }
    let p1 = rat(d, d - k);
    if *p <= p1 || *p > int(2) {
        return Err(Error::domain(format!(
            "beta_p needs d/(d-k) < p <= 2, got p = {}",
            fmt_rational(p)
        )));
    }
    let num = int(2) * gamma(params) * (p - &p1);
    let den = int(k) * p * (int(2) - &p1);
    Ok(num / den)
}

/// Dimension threshold of the prime-coordinate variant (exposed verbatim).
pub fn d1(k: u32) -> u32 {
    if k == 3 {
        13
    } else {
        k * k + k + 3
    }
}

/// All exponents for one `(d, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentBudget {
    pub params: FormParams,
    pub d0: BigRational,
    pub d0_star: u32,
    pub l0: u32,
    pub tau: BigRational,
    pub delta0: Delta0,
    /// `None` when `d <= k`.
    pub p0: Option<BigRational>,
    pub gamma: BigRational,
}

impl ExponentBudget {
    pub fn compute(params: FormParams) -> Result<Self> {
        let k = params.k();
        let (d0v, l0v) = d0_with_maximizer(k)?;
        let p0v = if params.d() > k { Some(p0(params)?) } else { None };
        Ok(ExponentBudget {
            params,
            d0_star: d0_star(k)?,
            d0: d0v,
            l0: l0v,
            tau: tau(k),
            delta0: delta0(params)?,
            p0: p0v,
            gamma: gamma(params),
        })
    }

    /// `α_p` evaluated with `δ = δ0(d,k)`, the edge of the admissible range.
    pub fn alpha_at(&self, p: &BigRational) -> Result<AlphaP> {
        let delta = if self.delta0.value.is_negative() {
            BigRational::zero()
        } else {
            self.delta0.value.clone()
        };
        alpha_p(p, &delta)
    }

    /// `(name, exact value)` pairs in a stable order for tabular output.
    pub fn entries(&self) -> Vec<(&'static str, BigRational)> {
        let mut v = vec![
            ("d0", self.d0.clone()),
            ("d0_star", int(self.d0_star as i64)),
            ("l0", int(self.l0 as i64)),
            ("tau", self.tau.clone()),
            ("delta0", self.delta0.value.clone()),
            ("gamma", self.gamma.clone()),
        ];
        if let Some(p) = &self.p0 {
            v.push(("p0", p.clone()));
        }
        v
    }
}

/// One column of the threshold comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub k: u32,
    pub d0: BigRational,
    pub d0_star: u32,
    /// Threshold from the earlier cubic-growth result, as tabulated.
    pub previous_threshold: u32,
    /// Best known upper bound for `G̃(k)`, as tabulated.
    pub waring_bound: u32,
}

const PREVIOUS_THRESHOLD: [u32; 8] = [13, 33, 81, 181, 295, 449, 649, 901];
const WARING_BOUND: [u32; 8] = [8, 15, 23, 34, 47, 61, 78, 97];

/// Threshold table for `k = 3..=10`; `d0` and `d0_star` are computed.
pub fn threshold_table() -> Vec<ThresholdRow> {
    (3..=10u32)
        .map(|k| {
            let i = (k - 3) as usize;
            ThresholdRow {
                k,
                d0: d0(k).expect("k >= 3"),
                d0_star: d0_star(k).expect("k >= 3"),
                previous_threshold: PREVIOUS_THRESHOLD[i],
                waring_bound: WARING_BOUND[i],
            }
        })
        .collect()
}
