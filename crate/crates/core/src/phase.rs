//! Unit-modulus phases `e(x) = exp(2πix)` with exact integer reduction.
//!
//! A real frequency is snapped once to a 64-bit fixed-point fraction of a
//! turn ([`Turns`]); multiplying it by an integer then wraps modulo `2^64`,
//! which is exactly "drop the integer part". Phases like `θ n^k` therefore
//! stay accurate for large `n` instead of losing digits to a huge float
//! product.

use std::f64::consts::TAU;

use num_complex::Complex64;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// A point of the circle `ℝ/ℤ` stored as a 64-bit binary fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Turns(pub u64);

impl Turns {
    pub const ZERO: Turns = Turns(0);

    /// Snaps `x mod 1` to the fixed-point grid, truncating `|x|`.
    ///
    /// `|x| - floor(|x|)` is exact in floating point, so only bits below
    /// `2^-64` are lost, and `from_f64(-x) == -from_f64(x)`.
    pub fn from_f64(x: f64) -> Turns {
        let a = x.abs();
        let scaled = (a - a.floor()) * TWO_POW_64;
        let t = if scaled >= TWO_POW_64 {
            Turns(0)
        } else {
            Turns(scaled as u64)
        };
        if x < 0.0 {
            -t
        } else {
            t
        }
    }

    /// Exact `a/q mod 1` rounded to the fixed-point grid.
    pub fn from_ratio(a: i128, q: u128) -> Turns {
        let r = a.rem_euclid(q as i128) as u128;
        // floor(r * 2^64 / q) without overflow: r < q.
        let hi = (r << 64) / q;
        Turns(hi as u64)
    }

    /// Fraction in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_64
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn centered(self) -> f64 {
        self.0 as i64 as f64 / TWO_POW_64
    }

    #[inline]
    pub fn mul_int(self, n: i64) -> Turns {
        Turns(self.0.wrapping_mul(n as u64))
    }

    #[inline]
    pub fn mul_u64(self, n: u64) -> Turns {
        Turns(self.0.wrapping_mul(n))
    }

    /// `self * n^k mod 1`, exact for the snapped frequency.
    #[inline]
    pub fn mul_pow(self, n: u64, k: u32) -> Turns {
        Turns(self.0.wrapping_mul(n.wrapping_pow(k)))
    }

    #[inline]
    pub fn exp(self) -> Complex64 {
        let (s, c) = (TAU * self.centered()).sin_cos();
        Complex64::new(c, s)
    }
}

impl std::ops::Add for Turns {
    type Output = Turns;
    #[inline]
    fn add(self, rhs: Turns) -> Turns {
        Turns(self.0.wrapping_add(rhs.0))
    }
}

impl std::ops::Neg for Turns {
    type Output = Turns;
    #[inline]
    fn neg(self) -> Turns {
        Turns(self.0.wrapping_neg())
    }
}

impl std::ops::Sub for Turns {
    type Output = Turns;
    #[inline]
    fn sub(self, rhs: Turns) -> Turns {
        Turns(self.0.wrapping_sub(rhs.0))
    }
}

/// `e(x) = exp(2πix)` for a float argument, reduced to `[-1/2, 1/2]` first.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * (x - x.round())).sin_cos();
    Complex64::new(c, s)
}

/// `e_q(m) = e(m/q)` with `m` reduced modulo `q` in integers first.
#[inline]
pub fn e_q(m: i128, q: u64) -> Complex64 {
    let r = m.rem_euclid(q as i128) as f64;
    e(r / q as f64)
}
