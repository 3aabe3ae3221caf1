//! On-disk cache for representation tables and Gauss-sum rows.
//!
//! Layout: a 16-byte little-endian header (4-byte magic, version byte, `k` as
//! one byte, `d` or zero as two bytes, then the bound as eight bytes), the
//! payload, and a SHA-256 trailer over header and payload. A file whose
//! header or checksum does not match is renamed to `*.bad` and recomputed.

use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expsum::gauss_row;
use crate::lattice::{count_representations, RepresentationTable};
use crate::params::FormParams;

use super::output::write_atomic;

const REP_MAGIC: &[u8; 4] = b"CLRT";
const GAUSS_MAGIC: &[u8; 4] = b"CLGT";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 16;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// A corrupt file was moved aside and the table recomputed.
    Quarantined,
    /// Caching is off or the directory is unusable.
    Disabled,
}

/// `G(q; a, b)` for all `q ≤ q_max`, `a ∈ ℤ_q^*` and `b ∈ [0, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussTable {
    pub k: u32,
    pub q_max: u64,
    pub rows: Vec<(u64, i64, Vec<Complex64>)>,
}

impl GaussTable {
    pub fn compute(k: u32, q_max: u64) -> Result<Self> {
        let mut rows = Vec::new();
        for q in 1..=q_max {
            for a in (0..q).filter(|a| a.gcd(&q) == 1) {
                rows.push((q, a as i64, gauss_row(q, a as i64, k)?));
            }
        }
        Ok(GaussTable { k, q_max, rows })
    }
}

#[derive(Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    warned: AtomicBool,
    messages: Mutex<Vec<String>>,
}

fn header(magic: &[u8; 4], k: u32, d: u16, bound: u64) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(magic);
    h[4] = VERSION;
    h[5] = k as u8;
    h[6..8].copy_from_slice(&d.to_le_bytes());
    h[8..16].copy_from_slice(&bound.to_le_bytes());
    h
}

fn seal(mut bytes: Vec<u8>) -> Vec<u8> {
    let digest = Sha256::digest(&bytes);
    bytes.extend_from_slice(&digest);
    bytes
}

/// Checks header and checksum; returns the payload.
fn open<'a>(bytes: &'a [u8], expected: &[u8; HEADER_LEN]) -> std::result::Result<&'a [u8], String> {
    if bytes.len() < HEADER_LEN + DIGEST_LEN {
        return Err(format!("file too short ({} bytes)", bytes.len()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch".into());
    }
    if &body[..HEADER_LEN] != expected {
        return Err("header does not match the requested table".into());
    }
    Ok(&body[HEADER_LEN..])
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> std::result::Result<&[u8], String> {
        if self.0.len() < n {
            return Err("truncated payload".into());
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_bits(self.u64()?))
    }
}

pub fn encode_representation_table(t: &RepresentationTable) -> Vec<u8> {
    let mut bytes = header(REP_MAGIC, t.params.k(), t.params.d() as u16, t.lambda_max).to_vec();
    for c in &t.counts {
        let limbs = c.to_u64_digits();
        bytes.extend_from_slice(&(limbs.len() as u32).to_le_bytes());
        for l in limbs {
            bytes.extend_from_slice(&l.to_le_bytes());
        }
    }
    seal(bytes)
}

pub fn decode_representation_table(
    bytes: &[u8],
    params: FormParams,
    lambda_max: u64,
) -> std::result::Result<RepresentationTable, String> {
    let expected = header(REP_MAGIC, params.k(), params.d() as u16, lambda_max);
    let mut r = Reader(open(bytes, &expected)?);
    let mut counts = Vec::with_capacity(lambda_max as usize + 1);
    for _ in 0..=lambda_max {
        let n = r.u32()? as usize;
        let limbs = (0..n).map(|_| r.u64()).collect::<std::result::Result<Vec<_>, _>>()?;
        counts.push(BigUint::from_slice(
            &limbs
                .iter()
                .flat_map(|l| [*l as u32, (*l >> 32) as u32])
                .collect::<Vec<_>>(),
        ));
    }
    if !r.0.is_empty() {
        return Err("trailing bytes after payload".into());
    }
    Ok(RepresentationTable {
        params,
        lambda_max,
        counts,
    })
}

pub fn encode_gauss_table(t: &GaussTable) -> Vec<u8> {
    let mut bytes = header(GAUSS_MAGIC, t.k, 0, t.q_max).to_vec();
    bytes.extend_from_slice(&(t.rows.len() as u64).to_le_bytes());
    for (q, a, row) in &t.rows {
        bytes.extend_from_slice(&q.to_le_bytes());
        bytes.extend_from_slice(&a.to_le_bytes());
        for z in row {
            bytes.extend_from_slice(&z.re.to_bits().to_le_bytes());
            bytes.extend_from_slice(&z.im.to_bits().to_le_bytes());
        }
    }
    seal(bytes)
}

pub fn decode_gauss_table(bytes: &[u8], k: u32, q_max: u64) -> std::result::Result<GaussTable, String> {
    let expected = header(GAUSS_MAGIC, k, 0, q_max);
    let mut r = Reader(open(bytes, &expected)?);
    let n = r.u64()?;
    let mut rows = Vec::new();
    for _ in 0..n {
        let q = r.u64()?;
        let a = r.u64()? as i64;
        if q == 0 || q > q_max {
            return Err(format!("row modulus {q} out of range"));
        }
        let row = (0..q)
            .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<std::result::Result<Vec<_>, String>>()?;
        rows.push((q, a, row));
    }
    if !r.0.is_empty() {
        return Err("trailing bytes after payload".into());
    }
    Ok(GaussTable { k, q_max, rows })
}

impl Cache {
    /// A cache rooted at `dir`; an unusable directory disables caching with
    /// one warning.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        let cache = Cache {
            dir: Some(dir.clone()),
            warned: AtomicBool::new(false),
            messages: Mutex::new(Vec::new()),
        };
        if let Err(e) = std::fs::create_dir_all(&dir) {
            let off = Cache::disabled();
            off.push(format!(
                "warning: cache directory {} unusable ({e}); continuing without cache",
                dir.display()
            ));
            return off;
        }
        cache
    }

    pub fn disabled() -> Self {
        Cache {
            dir: None,
            warned: AtomicBool::new(true),
            messages: Mutex::new(Vec::new()),
        }
    }

    /// Drains the warnings collected so far.
    pub fn take_messages(&self) -> Vec<String> {
        std::mem::take(&mut *self.messages.lock().unwrap_or_else(|p| p.into_inner()))
    }

    fn push(&self, msg: String) {
        self.messages.lock().unwrap_or_else(|p| p.into_inner()).push(msg);
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn warn(&self, msg: &str) {
        if !self.warned.swap(true, Ordering::Relaxed) {
            self.push(format!("warning: {msg}"));
        }
    }

    pub fn representation_path(&self, params: FormParams, lambda_max: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            d.join(format!("rep_k{}_d{}_L{}.bin", params.k(), params.d(), lambda_max))
        })
    }

    pub fn gauss_path(&self, k: u32, q_max: u64) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("gauss_k{k}_Q{q_max}.bin")))
    }

    fn lookup<T>(
        &self,
        path: Option<PathBuf>,
        decode: impl Fn(&[u8]) -> std::result::Result<T, String>,
        compute: impl Fn() -> Result<T>,
        encode: impl Fn(&T) -> Vec<u8>,
    ) -> Result<(T, CacheStatus)> {
        let Some(path) = path else {
            return Ok((compute()?, CacheStatus::Disabled));
        };
        let mut status = CacheStatus::Miss;
        match std::fs::read(&path) {
            Ok(bytes) => match decode(&bytes) {
                Ok(t) => return Ok((t, CacheStatus::Hit)),
                Err(reason) => {
                    let bad = path.with_extension("bin.bad");
                    self.push(format!(
                        "warning: {}",
                        Error::Corrupt {
                            path: path.clone(),
                            reason
                        }
                    ));
                    // Another process may have quarantined it already.
                    let _ = std::fs::rename(&path, &bad);
                    status = CacheStatus::Quarantined;
                }
            },
            Err(e) if e.kind() == ErrorKind::NotFound => {}
            Err(e) => self.warn(&format!("cannot read {}: {e}", path.display())),
        }
        let value = compute()?;
        if let Err(e) = write_atomic(&path, &encode(&value)) {
            self.warn(&format!("cannot write {}: {e}", path.display()));
        }
        Ok((value, status))
    }

    pub fn representation_table(
        &self,
        params: FormParams,
        lambda_max: u64,
    ) -> Result<(RepresentationTable, CacheStatus)> {
        self.lookup(
            self.representation_path(params, lambda_max),
            |b| decode_representation_table(b, params, lambda_max),
            || count_representations(params, lambda_max),
            encode_representation_table,
        )
    }

    pub fn gauss_table(&self, k: u32, q_max: u64) -> Result<(GaussTable, CacheStatus)> {
        self.lookup(
            self.gauss_path(k, q_max),
            |b| decode_gauss_table(b, k, q_max),
            || GaussTable::compute(k, q_max),
            encode_gauss_table,
        )
    }
}
