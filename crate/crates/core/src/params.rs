use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The pair `(k, d)` fixing the form `|x_1|^k + ... + |x_d|^k`.
///
/// `k = 2` is accepted so quadratic cases can serve as cross-checks; the
/// exponent formulas themselves require `k >= 3` and check it separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormParams {
    k: u32,
    d: u32,
}

impl FormParams {
    pub fn new(k: u32, d: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("degree k must be >= 2, got {k}")));
        }
        if d < 1 {
            return Err(Error::domain("dimension d must be >= 1"));
        }
        Ok(FormParams { k, d })
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    /// `λ^{1 - d/k}`, the normalisation of the averages.
    pub fn normalisation(&self, lambda: f64) -> f64 {
        lambda.powf(1.0 - self.d as f64 / self.k as f64)
    }

    /// Evaluates the form on an integer vector; `None` on overflow.
    pub fn eval(&self, x: &[i64]) -> Option<u64> {
        x.iter().try_fold(0u64, |acc, &xi| {
            let p = xi.unsigned_abs().checked_pow(self.k)?;
            acc.checked_add(p)
        })
    }

    /// Largest `n >= 0` with `n^k <= m`.
    pub fn root_floor(&self, m: u64) -> u64 {
        integer_root(m, self.k)
    }
}

/// Largest `n` with `n^k <= m`, in exact integer arithmetic.
pub fn integer_root(m: u64, k: u32) -> u64 {
    if m == 0 {
        return 0;
    }
    let mut n = (m as f64).powf(1.0 / k as f64).round() as u64;
    let fits = |n: u64| n.checked_pow(k).is_some_and(|p| p <= m);
    while !fits(n) {
        n -= 1;
    }
    while fits(n + 1) {
        n += 1;
    }
    n
}

/// Smallest `n` with `n^k >= m`.
pub fn integer_root_ceil(m: u64, k: u32) -> u64 {
    let n = integer_root(m, k);
    if n.pow(k) == m {
        n
    } else {
        n + 1
    }
}
