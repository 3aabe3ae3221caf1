use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_solutions, EnumerationMode};
use crate::error::{Error, Result};
use crate::params::{integer_root_ceil, FormParams};

/// Refuse to allocate grids with more cells than this.
pub const DEFAULT_GRID_CELL_CAP: u64 = 50_000_000;

/// A function on `{-B, ..., B}^d`, zero outside, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    d: u32,
    half_width: u32,
    values: Vec<Complex64>,
}

fn cell_count(d: u32, half_width: u32) -> Result<usize> {
    let side = 2 * half_width as u64 + 1;
    let cells = side
        .checked_pow(d)
        .filter(|&c| c <= DEFAULT_GRID_CELL_CAP)
        .ok_or_else(|| Error::CapExceeded {
            what: "grid cells",
            requested: format!("({side})^{d}"),
            cap: DEFAULT_GRID_CELL_CAP.to_string(),
        })?;
    Ok(cells as usize)
}

impl GridFunction {
    pub fn zeros(d: u32, half_width: u32) -> Result<Self> {
        let n = cell_count(d, half_width)?;
        Ok(GridFunction {
            d,
            half_width,
            values: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn from_values(d: u32, half_width: u32, values: Vec<Complex64>) -> Result<Self> {
        let n = cell_count(d, half_width)?;
        if values.len() != n {
            return Err(Error::domain(format!(
                "grid of dimension {d} and half-width {half_width} needs {n} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::domain("grid values must be finite"));
        }
        Ok(GridFunction {
            d,
            half_width,
            values,
        })
    }

    /// The indicator of the origin.
    pub fn delta(d: u32, half_width: u32) -> Result<Self> {
        let mut g = Self::zeros(d, half_width)?;
        let origin = vec![0; d as usize];
        let i = g.index_of(&origin).expect("origin is inside");
        g.values[i] = Complex64::new(1.0, 0.0);
        Ok(g)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn side(&self) -> i64 {
        2 * self.half_width as i64 + 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let b = self.half_width as i64;
        let side = self.side();
        let mut idx = 0i64;
        for &xi in x {
            if xi < -b || xi > b {
                return None;
            }
            idx = idx * side + (xi + b);
        }
        Some(idx as usize)
    }

    pub fn point_of(&self, mut idx: usize) -> Vec<i64> {
        let b = self.half_width as i64;
        let side = self.side() as usize;
        let mut x = vec![0i64; self.d as usize];
        for slot in x.iter_mut().rev() {
            *slot = (idx % side) as i64 - b;
            idx /= side;
        }
        x
    }

    pub fn get(&self, x: &[i64]) -> Complex64 {
        self.index_of(x)
            .map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    /// Zero-extends (or keeps) the grid to a larger half-width.
    pub fn padded(&self, half_width: u32) -> Result<Self> {
        if half_width < self.half_width {
            return Err(Error::domain("padding cannot shrink a grid"));
        }
        let mut out = Self::zeros(self.d, half_width)?;
        for (i, v) in self.values.iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) {
                let x = self.point_of(i);
                let j = out.index_of(&x).expect("larger box");
                out.values[j] = *v;
            }
        }
        Ok(out)
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| v.norm_sqr() != 0.0).count()
    }

    /// `ℓ^p` norm; `p = ∞` gives the max modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
        } else {
            self.values
                .iter()
                .map(|v| v.norm().powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
        }
    }
}

/// On-disk grid description: `d`, half-width and sparse `(index, re, im)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFile {
    pub d: u32,
    #[serde(rename = "box")]
    pub half_width: u32,
    pub values: Vec<(usize, f64, f64)>,
}

impl GridFile {
    pub fn into_grid(self) -> Result<GridFunction> {
        let mut g = GridFunction::zeros(self.d, self.half_width)?;
        let n = g.values.len();
        for (i, re, im) in self.values {
            if i >= n {
                return Err(Error::domain(format!("grid index {i} out of range (size {n})")));
            }
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::domain("grid values must be finite"));
            }
            g.values[i] = Complex64::new(re, im);
        }
        Ok(g)
    }

    pub fn from_grid(g: &GridFunction) -> Self {
        GridFile {
            d: g.d,
            half_width: g.half_width,
            values: g
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm_sqr() != 0.0)
                .map(|(i, v)| (i, v.re, v.im))
                .collect(),
        }
    }
}

fn check_dimension(f: &GridFunction, params: FormParams) -> Result<()> {
    if f.d != params.d() {
        return Err(Error::domain(format!(
            "grid dimension {} does not match d = {}",
            f.d,
            params.d()
        )));
    }
    Ok(())
}

/// Input grids with at most this fraction of nonzero cells use scattering.
const SPARSE_FRACTION: f64 = 0.05;

/// `A_λ f(x) = λ^{1-d/k} Σ_{f(y)=λ} f(x - y)` on the enlarged box.
pub fn apply_average(f: &GridFunction, lambda: u64, params: FormParams) -> Result<GridFunction> {
    let sparse = (f.nonzero_count() as f64) <= SPARSE_FRACTION * f.values.len() as f64;
    apply_average_with(f, lambda, params, sparse)
}

pub(crate) fn apply_average_with(
    f: &GridFunction,
    lambda: u64,
    params: FormParams,
    sparse: bool,
) -> Result<GridFunction> {
    check_dimension(f, params)?;
    if lambda == 0 {
        return Err(Error::domain("averages are defined for λ >= 1"));
    }
    let solutions = enumerate_solutions(params, lambda, EnumerationMode::Full)?;
    let ys = solutions.points().expect("full mode");
    let grow = integer_root_ceil(lambda, params.k()) as u32;
    let mut out = GridFunction::zeros(f.d, f.half_width + grow)?;
    let scale = params.normalisation(lambda as f64);

    if sparse {
        for (i, v) in f.values.iter().enumerate() {
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let x = f.point_of(i);
            for y in ys {
                let z: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                let j = out.index_of(&z).expect("output box covers x + y");
                out.values[j] += v * scale;
            }
        }
    } else {
        let out_grid = &out;
        let vals: Vec<Complex64> = (0..out.values.len())
            .into_par_iter()
            .map(|i| {
                let x = out_grid.point_of(i);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut z = vec![0i64; x.len()];
                for y in ys {
                    for (slot, (a, b)) in z.iter_mut().zip(x.iter().zip(y)) {
                        *slot = a - b;
                    }
                    acc += f.get(&z);
                }
                acc * scale
            })
            .collect();
        out.values = vals;
    }
    Ok(out)
}

/// Pointwise `max_{λ ∈ set} |A_λ f|` on the box of the largest radius.
pub fn maximal_function(
    f: &GridFunction,
    lambda_set: &[u64],
    params: FormParams,
) -> Result<GridFunction> {
    check_dimension(f, params)?;
    if lambda_set.is_empty() {
        return Err(Error::domain("lambda set must be non-empty"));
    }
    if lambda_set.contains(&0) {
        return Err(Error::domain("averages are defined for λ >= 1"));
    }
    let grow = lambda_set
        .iter()
        .map(|&l| integer_root_ceil(l, params.k()) as u32)
        .max()
        .expect("non-empty");
    let mut out = GridFunction::zeros(f.d, f.half_width + grow)?;
    for &lambda in lambda_set {
        let avg = apply_average(f, lambda, params)?;
        for (i, v) in avg.values.iter().enumerate() {
            let x = avg.point_of(i);
            let j = out.index_of(&x).expect("common box is largest");
            let m = v.norm();
            if m > out.values[j].re {
                out.values[j] = Complex64::new(m, 0.0);
            }
        }
    }
    Ok(out)
}

/// `‖A_* f‖_p / ‖f‖_p` over a finite λ-set.
///
/// This is a lower bound for the operator norm of the truncated maximal
/// function, never an estimate of it.
pub fn empirical_lp_ratio(
    f: &GridFunction,
    p: f64,
    lambda_set: &[u64],
    params: FormParams,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("p must be >= 1, got {p}")));
    }
    let denom = f.lp_norm(p);
    if denom == 0.0 {
        return Err(Error::domain("input function is identically zero"));
    }
    let m = maximal_function(f, lambda_set, params)?;
    Ok(m.lp_norm(p) / denom)
}
