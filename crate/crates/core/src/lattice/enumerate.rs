use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::FormParams;

/// Default cap on materialised solution points.
pub const DEFAULT_POINT_CAP: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Join the half tables and list every solution.
    Full,
    /// Return the two half tables keyed by partial form value.
    Factored,
}

/// Integer vectors of a fixed length grouped by their partial form value.
#[derive(Debug, Clone, Default)]
pub struct HalfTable {
    pub dims: usize,
    pub by_value: HashMap<u64, Vec<Vec<i64>>>,
}

impl HalfTable {
    /// All `x ∈ ℤ^dims` with `Σ|x_i|^k <= bound`.
    pub fn build(k: u32, dims: usize, bound: u64) -> Self {
        let n = crate::params::integer_root(bound, k) as i64;
        let mut by_value: HashMap<u64, Vec<Vec<i64>>> = HashMap::new();
        let mut current = Vec::with_capacity(dims);
        fn rec(
            k: u32,
            dims: usize,
            n: i64,
            bound: u64,
            partial: u64,
            current: &mut Vec<i64>,
            out: &mut HashMap<u64, Vec<Vec<i64>>>,
        ) {
            if current.len() == dims {
                out.entry(partial).or_default().push(current.clone());
                return;
            }
            for x in -n..=n {
                let v = partial + x.unsigned_abs().pow(k);
                if v > bound {
                    continue;
                }
                current.push(x);
                rec(k, dims, n, bound, v, current, out);
                current.pop();
            }
        }
        rec(k, dims, n, bound, 0, &mut current, &mut by_value);
        HalfTable { dims, by_value }
    }

    pub fn count_at(&self, value: u64) -> u64 {
        self.by_value.get(&value).map_or(0, |v| v.len() as u64)
    }

    pub fn len(&self) -> usize {
        self.by_value.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub enum SolutionPoints {
    /// Every solution, sorted lexicographically.
    Full(Vec<Vec<i64>>),
    /// First-half table (first `⌊d/2⌋` coordinates) and second-half table.
    Factored { first: HalfTable, second: HalfTable },
}

/// Solutions of `f(x) = λ`.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub params: FormParams,
    pub lambda: u64,
    pub points: SolutionPoints,
}

impl SolutionSet {
    /// `R(λ)`, computed from either representation.
    pub fn count(&self) -> u64 {
        match &self.points {
            SolutionPoints::Full(p) => p.len() as u64,
            SolutionPoints::Factored { first, second } => join_count(first, second, self.lambda),
        }
    }

    pub fn points(&self) -> Option<&[Vec<i64>]> {
        match &self.points {
            SolutionPoints::Full(p) => Some(p),
            SolutionPoints::Factored { .. } => None,
        }
    }
}

fn join_count(first: &HalfTable, second: &HalfTable, lambda: u64) -> u64 {
    second
        .by_value
        .iter()
        .map(|(&s, v)| first.count_at(lambda - s) * v.len() as u64)
        .sum()
}

pub fn enumerate_solutions(
    params: FormParams,
    lambda: u64,
    mode: EnumerationMode,
) -> Result<SolutionSet> {
    enumerate_solutions_capped(params, lambda, mode, DEFAULT_POINT_CAP)
}

/// Meet-in-the-middle enumeration over a `⌊d/2⌋ + ⌈d/2⌉` coordinate split.
///
/// The smaller first half is hashed by partial value; the larger second half
/// is enumerated and probed with `λ - s`.
pub fn enumerate_solutions_capped(
    params: FormParams,
    lambda: u64,
    mode: EnumerationMode,
    point_cap: u64,
) -> Result<SolutionSet> {
    let d = params.d() as usize;
    let first_dims = d / 2;
    let second_dims = d - first_dims;
    let k = params.k();
    let first = HalfTable::build(k, first_dims, lambda);
    let second = HalfTable::build(k, second_dims, lambda);
    let points = match mode {
        EnumerationMode::Factored => SolutionPoints::Factored { first, second },
        EnumerationMode::Full => {
            let total = join_count(&first, &second, lambda);
            if total > point_cap {
                return Err(Error::CapExceeded {
                    what: "solution enumeration",
                    requested: format!("R({lambda}) = {total}"),
                    cap: point_cap.to_string(),
                });
            }
            let mut out = Vec::with_capacity(total as usize);
            for (&s, tails) in &second.by_value {
                let Some(heads) = first.by_value.get(&(lambda - s)) else {
                    continue;
                };
                for h in heads {
                    for t in tails {
                        let mut x = Vec::with_capacity(d);
                        x.extend_from_slice(h);
                        x.extend_from_slice(t);
                        out.push(x);
                    }
                }
            }
            out.sort_unstable();
            SolutionPoints::Full(out)
        }
    };
    Ok(SolutionSet {
        params,
        lambda,
        points,
    })
}
