//! C interface. Every function returns a [`HermiteStatus`]; on failure the
//! message is available from [`hermite_last_error`]. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`hermite_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hermite::ascent::{critical_points, semiresultant, ComplexPoly, Tolerances};
use hermite::cf::{stream_cf, CfStream, Limit};
use hermite::forest::{build_forest, verify_forest, DistanceOracle};
use hermite::hermite::{mahler_det, AlphaSet, MultiIndex};
use hermite::rational::{parse_rational, parse_rational_list};
use hermite::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HermiteStatus {
    Ok = 0,
    /// Malformed or out-of-range input.
    InvalidArgument = 1,
    NullPointer = 2,
    /// A computation failed or a check did not hold.
    Numerical = 3,
    /// A stream has no further items.
    End = 4,
    /// Internal error; the library state is unchanged.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: Error) -> HermiteStatus {
    set_error(&e.to_string());
    match e {
        Error::Numerical(_) | Error::PrecisionExhausted(_) | Error::NotInM(_) => HermiteStatus::Numerical,
        _ => HermiteStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> HermiteStatus>(f: F) -> HermiteStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            HermiteStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, HermiteStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(HermiteStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        HermiteStatus::InvalidArgument
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> HermiteStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            HermiteStatus::Ok
        }
        Err(_) => fail(Error::Numerical("result contains a NUL byte".into())),
    }
}

/// Message of the last failure on this thread. The pointer stays valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn hermite_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hermite_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hermite_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opaque stream of partial quotients of `e^α`.
pub struct HermiteCfStream {
    inner: CfStream,
}

/// Opens a stream for `e^alpha` (`alpha` a rational literal such as "7/3").
/// With `count > 0` the stream ends after `count` quotients; otherwise it
/// ends once `q_{n-1}` exceeds `10^qmax_log10`.
///
/// # Safety
/// `alpha` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hermite_cf_stream_new(alpha: *const c_char, count: u64, qmax_log10: f64, out: *mut *mut HermiteCfStream) -> HermiteStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return HermiteStatus::NullPointer;
        }
        let text = match read_str(alpha) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let limit = if count > 0 {
            Limit::Count(count)
        } else if qmax_log10 > 0.0 {
            Limit::LogQ(qmax_log10 * std::f64::consts::LN_10)
        } else {
            return fail(Error::InvalidArgument("need count > 0 or qmax_log10 > 0".into()));
        };
        match parse_rational(text).and_then(|a| stream_cf(&a, limit)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(HermiteCfStream { inner: s }));
                HermiteStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Next quotient `a_index` as a decimal string. Returns `End` when the
/// stream is exhausted.
///
/// # Safety
/// `stream` must come from [`hermite_cf_stream_new`]; `index` and `value`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hermite_cf_stream_next(stream: *mut HermiteCfStream, index: *mut u64, value: *mut *mut c_char) -> HermiteStatus {
    guard(|| {
        if stream.is_null() || index.is_null() || value.is_null() {
            set_error("null pointer argument");
            return HermiteStatus::NullPointer;
        }
        match (*stream).inner.next() {
            None => HermiteStatus::End,
            Some(Err(e)) => fail(e),
            Some(Ok(q)) => {
                *index = q.index;
                write_string(value, q.value.to_string())
            }
        }
    })
}

/// # Safety
/// `stream` must come from [`hermite_cf_stream_new`] and not have been
/// freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hermite_cf_stream_free(stream: *mut HermiteCfStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// `Δ_n` for comma-separated rationals `alphas` and `n[0..len]`, written as
/// a rational literal.
///
/// # Safety
/// `alphas` must be NUL-terminated, `n` must point to `len` integers and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hermite_mahler_det(alphas: *const c_char, n: *const i64, len: usize, out: *mut *mut c_char) -> HermiteStatus {
    guard(|| {
        if n.is_null() || out.is_null() {
            set_error("null pointer argument");
            return HermiteStatus::NullPointer;
        }
        let text = match read_str(alphas) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let idx = MultiIndex::new(std::slice::from_raw_parts(n, len).to_vec());
        match parse_rational_list(text).and_then(AlphaSet::new).and_then(|a| mahler_det(&a, &idx)) {
            Ok(d) => write_string(out, d.to_string()),
            Err(e) => fail(e),
        }
    })
}

/// The p-adic rooted forest on comma-separated rational `points` with
/// `δ = p^{-1/(p-1)}`, as JSON `{"roots": [...], "edges": [[parent, child], ...]}`
/// over zero-based point indices.
///
/// # Safety
/// `points` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hermite_forest_json(points: *const c_char, p: u64, out: *mut *mut c_char) -> HermiteStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return HermiteStatus::NullPointer;
        }
        let text = match read_str(points) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let run = || -> hermite::Result<String> {
            let pts = AlphaSet::new(parse_rational_list(text)?)?;
            let oracle = DistanceOracle::new(p)?;
            let delta = oracle.default_delta();
            let forest = build_forest(&pts, &delta, &oracle);
            verify_forest(&forest, &pts, &delta, &oracle).map_err(|w| Error::Numerical(format!("forest check failed: {w:?}")))?;
            serde_json::to_string(&forest).map_err(|e| Error::Numerical(e.to_string()))
        };
        match run() {
            Ok(s) => write_string(out, s),
            Err(e) => fail(e),
        }
    })
}

/// Both sides of the semi-resultant identity for `∏ (z - r_i)^{mult_i}`.
/// `left` and `right` receive `[re, im]`; `deviation` the relative gap.
///
/// # Safety
/// `re`, `im` and `mult` must point to `len` values; `left` and `right` to
/// two doubles each; `deviation` to one.
#[no_mangle]
pub unsafe extern "C" fn hermite_semiresultant(
    re: *const f64,
    im: *const f64,
    mult: *const u32,
    len: usize,
    left: *mut f64,
    right: *mut f64,
    deviation: *mut f64,
) -> HermiteStatus {
    guard(|| {
        if re.is_null() || im.is_null() || mult.is_null() || left.is_null() || right.is_null() || deviation.is_null() {
            set_error("null pointer argument");
            return HermiteStatus::NullPointer;
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let roots: Vec<Complex64> = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let mult = std::slice::from_raw_parts(mult, len).to_vec();
        let tol = Tolerances::default();
        let sr = match ComplexPoly::from_roots(roots, mult).and_then(|f| critical_points(&f, &tol).map(|c| semiresultant(&f, &c))) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        ptr::copy_nonoverlapping([sr.left.re, sr.left.im].as_ptr(), left, 2);
        ptr::copy_nonoverlapping([sr.right.re, sr.right.im].as_ptr(), right, 2);
        *deviation = sr.relative_deviation;
        HermiteStatus::Ok
    })
}
