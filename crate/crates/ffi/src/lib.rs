//! C ABI for `circle-lab`.
//!
//! Every function returns a [`CircleLabStatus`] and writes results through
//! out-pointers. Tables and dissections are opaque handles created by a
//! `*_new` function and released by the matching `*_free`. After a non-OK
//! status, [`circle_lab_last_error`] describes the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use circle_lab::arcs::{dissect, ArcClass, ArcDissection};
use circle_lab::lattice::{count_representations, RepresentationTable};
use circle_lab::oscillatory::QuadratureSpec;
use circle_lab::{Error, FormParams};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleLabStatus {
    Ok = 0,
    /// A precondition on the inputs does not hold.
    Domain = 1,
    /// A size cap would be exceeded.
    CapExceeded = 2,
    /// A sample set was empty after filtering.
    EmptySample = 3,
    NullPointer = 4,
    /// The requested index is outside the handle's range, or a value does not fit.
    OutOfRange = 5,
    Internal = 6,
}

/// Representation counts `R(λ)` for `0 ≤ λ ≤ lambda_max`.
pub struct CircleLabRepTable(RepresentationTable);

/// Farey dissection into major and minor arcs.
pub struct CircleLabArcs(ArcDissection);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CircleLabStatus {
    match e {
        Error::Domain(_) | Error::Parse(_) => CircleLabStatus::Domain,
        Error::CapExceeded { .. } => CircleLabStatus::CapExceeded,
        Error::EmptySample(_) => CircleLabStatus::EmptySample,
        _ => CircleLabStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CircleLabStatus, String)>) -> CircleLabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CircleLabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CircleLabStatus::Internal
        }
    }
}

trait Lift<T> {
    fn lift(self) -> Result<T, (CircleLabStatus, String)>;
}

impl<T> Lift<T> for circle_lab::Result<T> {
    fn lift(self) -> Result<T, (CircleLabStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (CircleLabStatus, String) {
    (CircleLabStatus::NullPointer, format!("{name} is null"))
}

unsafe fn write<T>(ptr: *mut T, value: T, name: &str) -> Result<(), (CircleLabStatus, String)> {
    if ptr.is_null() {
        return Err(null(name));
    }
    ptr.write(value);
    Ok(())
}

unsafe fn write_complex(
    re: *mut f64,
    im: *mut f64,
    z: Complex64,
) -> Result<(), (CircleLabStatus, String)> {
    if re.is_null() || im.is_null() {
        return Err(null("out_re/out_im"));
    }
    re.write(z.re);
    im.write(z.im);
    Ok(())
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], (CircleLabStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn params(k: u32, d: u32) -> Result<FormParams, (CircleLabStatus, String)> {
    FormParams::new(k, d).lift()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn circle_lab_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(
        concat!("circle-lab ", env!("CARGO_PKG_VERSION"), "\0").as_bytes(),
    ) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread; valid until the next
/// failing call on the same thread. Empty if nothing failed yet.
#[no_mangle]
pub extern "C" fn circle_lab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds `R(λ)` for `λ ≤ lambda_max`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_rep_table_new(
    k: u32,
    d: u32,
    lambda_max: u64,
    out: *mut *mut CircleLabRepTable,
) -> CircleLabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let table = count_representations(params(k, d)?, lambda_max).lift()?;
        out.write(Box::into_raw(Box::new(CircleLabRepTable(table))));
        Ok(())
    })
}

/// `R(λ)`; `OUT_OF_RANGE` if `λ` exceeds the table or the count exceeds `u64`.
///
/// # Safety
/// `table` must come from [`circle_lab_rep_table_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_rep_table_count(
    table: *const CircleLabRepTable,
    lambda: u64,
    out: *mut u64,
) -> CircleLabStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        let c = t.0.get(lambda).ok_or_else(|| {
            (
                CircleLabStatus::OutOfRange,
                format!("λ = {lambda} exceeds lambda_max = {}", t.0.lambda_max),
            )
        })?;
        let v = u64::try_from(c)
            .map_err(|_| (CircleLabStatus::OutOfRange, format!("R({lambda}) = {c} exceeds u64")))?;
        write(out, v, "out")
    })
}

/// Largest `λ` stored in the table.
///
/// # Safety
/// `table` must come from [`circle_lab_rep_table_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_rep_table_lambda_max(
    table: *const CircleLabRepTable,
    out: *mut u64,
) -> CircleLabStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        write(out, t.0.lambda_max, "out")
    })
}

/// # Safety
/// `table` must come from [`circle_lab_rep_table_new`] and not be used afterwards.
/// Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_rep_table_free(table: *mut CircleLabRepTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Dissection at level `n` for degree `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_arcs_new(
    n: u64,
    k: u32,
    out: *mut *mut CircleLabArcs,
) -> CircleLabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = dissect(n, k).lift()?;
        out.write(Box::into_raw(Box::new(CircleLabArcs(d))));
        Ok(())
    })
}

/// Number of listed major arcs (both `0/1` and `1/1` included).
///
/// # Safety
/// `arcs` must come from [`circle_lab_arcs_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_arcs_len(
    arcs: *const CircleLabArcs,
    out: *mut usize,
) -> CircleLabStatus {
    guard(|| {
        let a = arcs.as_ref().ok_or_else(|| null("arcs"))?;
        write(out, a.0.arcs().len(), "out")
    })
}

/// Classifies `theta`; writes `q = 0` for the minor arcs, else the arc's `a/q`.
///
/// # Safety
/// `arcs` must come from [`circle_lab_arcs_new`]; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_arcs_classify(
    arcs: *const CircleLabArcs,
    theta: f64,
    out_a: *mut u64,
    out_q: *mut u64,
) -> CircleLabStatus {
    guard(|| {
        let a = arcs.as_ref().ok_or_else(|| null("arcs"))?;
        if !theta.is_finite() {
            return Err((CircleLabStatus::Domain, "θ must be finite".into()));
        }
        let (num, q) = match a.0.classify(theta) {
            ArcClass::Major { a, q } => (a, q),
            ArcClass::Minor => (0, 0),
        };
        write(out_a, num, "out_a")?;
        write(out_q, q, "out_q")
    })
}

/// # Safety
/// `arcs` must come from [`circle_lab_arcs_new`] and not be used afterwards.
/// Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_arcs_free(arcs: *mut CircleLabArcs) {
    if !arcs.is_null() {
        drop(Box::from_raw(arcs));
    }
}

/// `d0*(k) = 1 + ⌊d0(k)⌋`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_d0_star(k: u32, out: *mut u32) -> CircleLabStatus {
    guard(|| write(out, circle_lab::exponents::d0_star(k).lift()?, "out"))
}

/// Normalised Gauss sum `G(q; a, b)`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_gauss_sum(
    q: u64,
    a: i64,
    b: i64,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CircleLabStatus {
    guard(|| {
        let g = circle_lab::expsum::gauss_sum(q, a, b, k).lift()?;
        write_complex(out_re, out_im, g.value)
    })
}

/// `S_N(θ, ξ) = Σ_{|n| ≤ N} e(θ|n|^k + ξn)`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_weyl_sum(
    theta: f64,
    xi: f64,
    n: u64,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CircleLabStatus {
    guard(|| write_complex(out_re, out_im, circle_lab::expsum::s_n(theta, xi, n, k)))
}

/// `v_N(θ, ξ)` with the default quadrature settings.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_v_n(
    theta: f64,
    xi: f64,
    n: f64,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CircleLabStatus {
    guard(|| {
        let v = circle_lab::oscillatory::v_n(theta, xi, n, k, &QuadratureSpec::default()).lift()?;
        write_complex(out_re, out_im, v)
    })
}

/// `d̃σ_λ(η)` for `η` of length `d`.
///
/// # Safety
/// `eta` must point to `d` readable doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_sigma_hat(
    eta: *const f64,
    d: u32,
    lambda: f64,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CircleLabStatus {
    guard(|| {
        let eta = slice(eta, d as usize, "eta")?;
        let v = circle_lab::oscillatory::sigma_hat(eta, lambda, params(k, d)?, &QuadratureSpec::default())
            .lift()?;
        write_complex(out_re, out_im, v)
    })
}

/// `Â_λ(ξ)` for `ξ` of length `d`.
///
/// # Safety
/// `xi` must point to `d` readable doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn circle_lab_a_hat(
    lambda: u64,
    xi: *const f64,
    d: u32,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CircleLabStatus {
    guard(|| {
        let xi = slice(xi, d as usize, "xi")?;
        let v = circle_lab::multiplier::a_hat(lambda, xi, params(k, d)?).lift()?;
        write_complex(out_re, out_im, v)
    })
}
