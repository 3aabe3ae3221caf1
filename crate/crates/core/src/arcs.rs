//! Farey dissection of the circle into major and minor arcs.
//!
//! At level `N` the major arc around a reduced fraction `a/q` with
//! `1 <= q <= N` is the closed interval of radius `1/(4kqN^{k-1})`. Both
//! `0/1` and `1/1` are listed; mod 1 they form one wrapped arc.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::phase::Turns;

/// The major arc centred at the reduced fraction `a/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajorArc {
    pub a: u64,
    pub q: u64,
}

impl MajorArc {
    pub fn center(&self) -> BigRational {
        BigRational::new(BigInt::from(self.a), BigInt::from(self.q))
    }
}

/// Result of classifying a point of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcClass {
    Major { a: u64, q: u64 },
    Minor,
}

impl ArcClass {
    pub fn is_minor(self) -> bool {
        matches!(self, ArcClass::Minor)
    }
}

#[derive(Debug, Clone)]
pub struct ArcDissection {
    n: u64,
    k: u32,
    /// `4 k N^{k-1}`; the radius of the arc at `a/q` is `1/(scale·q)`.
    scale: BigUint,
    scale_u128: Option<u128>,
    arcs: Vec<MajorArc>,
}

/// The Farey sequence of order `n`, from `0/1` to `1/1` inclusive.
pub fn farey_sequence(n: u64) -> Vec<(u64, u64)> {
    let mut out = vec![(0, 1)];
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    while c <= n {
        out.push((c, d));
        let k = (n + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
        if a == 1 && b == 1 {
            break;
        }
    }
    out
}

pub fn dissect(n: u64, k: u32) -> Result<ArcDissection> {
    if n < 1 {
        return Err(Error::domain("dissection level N must be >= 1"));
    }
    if k < 2 {
        return Err(Error::domain("degree k must be >= 2"));
    }
    let scale = BigUint::from(4u32 * k) * BigUint::from(n).pow(k - 1);
    let scale_u128 = u128::try_from(&scale).ok();
    let arcs: Vec<MajorArc> = farey_sequence(n)
        .into_iter()
        .map(|(a, q)| MajorArc { a, q })
        .collect();
    // Neighbours a/q < b/r are disjoint iff (br − aq)/(qr) > (q + r)/(scale·qr).
    for w in arcs.windows(2) {
        let (a, q, b, r) = (w[0].a as u128, w[0].q as u128, w[1].a as u128, w[1].q as u128);
        let det = b * q - a * r;
        let apart = match scale_u128.and_then(|s| s.checked_mul(det)) {
            Some(v) => v > q + r,
            None => true,
        };
        assert!(apart, "major arcs at {a}/{q} and {b}/{r} overlap");
    }
    Ok(ArcDissection {
        n,
        k,
        scale,
        scale_u128,
        arcs,
    })
}

impl ArcDissection {
    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// `1/(4kqN^{k-1})`.
    pub fn radius(&self, arc: &MajorArc) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(&self.scale * BigUint::from(arc.q)))
    }

    /// Arcs sorted by center.
    pub fn arcs(&self) -> &[MajorArc] {
        &self.arcs
    }

    /// `|θ - a/q| <= r_q` for `θ = t/2^64`, in exact integers.
    fn contains_turns(&self, arc: &MajorArc, t: Turns) -> bool {
        let lhs = t.0 as u128 * arc.q as u128;
        let rhs = (arc.a as u128) << 64;
        let diff = lhs.abs_diff(rhs);
        match self.scale_u128.and_then(|s| diff.checked_mul(s)) {
            Some(v) => v <= 1u128 << 64,
            None => {
                diff == 0 || BigUint::from(diff) * &self.scale <= (BigUint::one() << 64)
            }
        }
    }

    /// Classifies a float point after snapping it to a 64-bit binary fraction.
    pub fn classify(&self, theta: f64) -> ArcClass {
        self.classify_turns(Turns::from_f64(theta))
    }

    pub fn classify_turns(&self, t: Turns) -> ArcClass {
        // First arc whose center is > t/2^64.
        let pos = self
            .arcs
            .partition_point(|arc| ((arc.a as u128) << 64) <= t.0 as u128 * arc.q as u128);
        for i in [pos.wrapping_sub(1), pos] {
            if let Some(arc) = self.arcs.get(i) {
                if self.contains_turns(arc, t) {
                    return ArcClass::Major { a: arc.a, q: arc.q };
                }
            }
        }
        // t is in [0, 1): the 1/1 arc also covers points just below 1.
        let last = self.arcs.last().expect("non-empty");
        if self.contains_turns(last, t) {
            return ArcClass::Major { a: last.a, q: last.q };
        }
        ArcClass::Minor
    }

    /// Exact classification of a rational point of `[0, 1)`.
    pub fn classify_rational(&self, theta: &BigRational) -> ArcClass {
        let (num, den) = (theta.numer(), theta.denom());
        let pos = self
            .arcs
            .partition_point(|arc| BigInt::from(arc.a) * den <= num * BigInt::from(arc.q));
        for i in [pos.wrapping_sub(1), pos] {
            if let Some(arc) = self.arcs.get(i) {
                let center = arc.center();
                let dist = if *theta >= center {
                    theta - &center
                } else {
                    &center - theta
                };
                if dist <= self.radius(arc) {
                    return ArcClass::Major { a: arc.a, q: arc.q };
                }
            }
        }
        ArcClass::Minor
    }

    /// Reference classification by scanning every arc.
    pub fn classify_linear(&self, theta: f64) -> ArcClass {
        let t = Turns::from_f64(theta);
        self.arcs
            .iter()
            .find(|arc| self.contains_turns(arc, t))
            .map_or(ArcClass::Minor, |arc| ArcClass::Major { a: arc.a, q: arc.q })
    }
}

/// Exact total length of the major arcs mod 1, and of the minor arcs.
pub fn major_total_measure(dissection: &ArcDissection) -> (BigRational, BigRational) {
    // Every arc contributes 2/(scale·q), except 0/1 and 1/1, which keep the
    // half inside [0, 1] and together make up 2/scale.
    let mut per_q = vec![0u64; dissection.n as usize + 1];
    for arc in &dissection.arcs {
        per_q[arc.q as usize] += 2;
    }
    per_q[1] = 2;
    let mut sum = BigRational::zero();
    for (q, &c) in per_q.iter().enumerate().skip(1) {
        if c > 0 {
            sum += BigRational::new(BigInt::from(c), BigInt::from(q));
        }
    }
    let total = sum / BigRational::from_integer(BigInt::from(dissection.scale.clone()));
    let minor = BigRational::one() - &total;
    (total, minor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn euler_phi(mut n: u64) -> u64 {
        let mut result = n;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                while n.is_multiple_of(p) {
                    n /= p;
                }
                result -= result / p;
            }
            p += 1;
        }
        if n > 1 {
            result -= result / n;
        }
        result
    }

    #[test]
    fn level_one() {
        let diss = dissect(1, 3).unwrap();
        let centers: Vec<_> = diss.arcs().iter().map(|a| (a.a, a.q)).collect();
        assert_eq!(centers, vec![(0, 1), (1, 1)]);
        assert_eq!(diss.radius(&diss.arcs()[0]), rat(1, 12));
        assert_eq!(major_total_measure(&diss).0, rat(1, 6));
    }

    #[test]
    fn level_three_centers() {
        let diss = dissect(3, 3).unwrap();
        let centers: Vec<_> = diss.arcs().iter().map(|a| a.center()).collect();
        assert_eq!(centers, vec![rat(0, 1), rat(1, 3), rat(1, 2), rat(2, 3), rat(1, 1)]);
    }

    #[test]
    fn farey_cardinality() {
        for n in 1..=60 {
            let expect = 1 + (1..=n).map(euler_phi).sum::<u64>();
            assert_eq!(farey_sequence(n).len() as u64, expect, "N = {n}");
        }
    }

    #[test]
    fn centers_and_just_outside() {
        let k = 3;
        for n in [3u64, 5, 11] {
            let diss = dissect(n, k).unwrap();
            for arc in diss.arcs() {
                if arc.a == arc.q && arc.q == 1 {
                    continue;
                }
                assert_eq!(
                    diss.classify_rational(&arc.center()),
                    ArcClass::Major { a: arc.a, q: arc.q }
                );
            }
            let r = rat(1, (4 * k as i64) * 2 * (n as i64).pow(k - 1));
            let outside = rat(1, 2) + &r * BigInt::from(2);
            assert_eq!(diss.classify_rational(&outside), ArcClass::Minor);
            let edge = rat(1, 2) + &r;
            assert_eq!(diss.classify_rational(&edge), ArcClass::Major { a: 1, q: 2 });
            let x = outside.to_f64().unwrap();
            assert_eq!(diss.classify(x), ArcClass::Minor);
        }
    }

    #[test]
    fn wraps_near_one() {
        let diss = dissect(4, 3).unwrap();
        assert_eq!(diss.classify(1.0 - 1e-6), ArcClass::Major { a: 1, q: 1 });
        assert_eq!(diss.classify(1e-6), ArcClass::Major { a: 0, q: 1 });
    }

    #[test]
    fn measure_is_below_one_and_monotone() {
        for n in [1u64, 2, 5, 20] {
            let m3 = major_total_measure(&dissect(n, 3).unwrap()).0;
            let m4 = major_total_measure(&dissect(n, 4).unwrap()).0;
            let m5 = major_total_measure(&dissect(n, 5).unwrap()).0;
            assert!(m3 < BigRational::one());
            assert!(m4 < m3 && m5 < m4);
        }
    }
}
