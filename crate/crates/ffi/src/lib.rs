//! C ABI over `faber-core`.
//!
//! Every function returns a [`FaberStatus`] and writes its result through an
//! out-pointer. On failure a description is available from
//! [`faber_last_error`] on the same thread until the next call. Series are
//! opaque heap handles released with [`faber_series_free`]; strings returned
//! by the library are released with [`faber_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Mutex;

use faber_core::dyadic::node_set;
use faber_core::faber::{analyze, io, FaberSeries, FunctionHandle};
use faber_core::seqnorm::{seq_norm, Exponent, NormParams};
use faber_core::FaberError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaberStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationError = 3,
    ParseError = 4,
    Panic = 5,
}

/// Opaque truncated Faber series.
pub struct FaberSeriesHandle {
    series: FaberSeries,
}

/// Sample callback: returns `f(x)` for a point of `dim` coordinates.
pub type FaberSampleFn =
    Option<extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &FaberError) -> FaberStatus {
    match e {
        FaberError::Parse { .. } | FaberError::Json(_) | FaberError::Csv(_) => {
            FaberStatus::ParseError
        }
        FaberError::NonFinite { .. } | FaberError::MeshTooLarge { .. } | FaberError::Io(_) => {
            FaberStatus::ComputationError
        }
        _ => FaberStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (FaberStatus, String)>) -> FaberStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FaberStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FaberStatus::Panic
        }
    }
}

fn fail(e: FaberError) -> (FaberStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (FaberStatus, String) {
    (FaberStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn handle_ref<'a>(
    h: *const FaberSeriesHandle,
) -> Result<&'a FaberSeries, (FaberStatus, String)> {
    h.as_ref().map(|h| &h.series).ok_or_else(|| null("series"))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), (FaberStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

struct Callback {
    f: extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    user_data: *mut c_void,
}

// SAFETY: calls are serialized through a Mutex, so the callback and its
// user data are never entered concurrently.
unsafe impl Send for Callback {}

/// Message for the last failed call on this thread, or null. Owned by the
/// library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn faber_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Samples `f` on the sparse grid of budget `n` and returns `I_n f`.
/// `f` is called from one thread at a time.
///
/// # Safety
/// `out` must be valid for writes; `f` must be safe to call with
/// `user_data`.
#[no_mangle]
pub unsafe extern "C" fn faber_analyze(
    dim: usize,
    n: u32,
    f: FaberSampleFn,
    user_data: *mut c_void,
    out: *mut *mut FaberSeriesHandle,
) -> FaberStatus {
    guard(|| {
        let f = f.ok_or_else(|| null("f"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let callback = Mutex::new(Callback { f, user_data });
        let handle = FunctionHandle::new(dim, "c-callback", move |x| {
            let cb = callback.lock().unwrap_or_else(|p| p.into_inner());
            (cb.f)(x.as_ptr(), x.len(), cb.user_data)
        });
        let series = analyze(&handle, n).map_err(fail)?;
        out.write(Box::into_raw(Box::new(FaberSeriesHandle { series })));
        Ok(())
    })
}

/// # Safety
/// `h` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn faber_series_free(h: *mut FaberSeriesHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle, `x` must point to `dim` doubles, `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_series_evaluate(
    h: *const FaberSeriesHandle,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> FaberStatus {
    guard(|| {
        let s = handle_ref(h)?;
        if x.is_null() {
            return Err(null("x"));
        }
        let point = std::slice::from_raw_parts(x, dim);
        let v = s.evaluate(point).map_err(fail)?;
        write(out, v, "out")
    })
}

/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_series_integrate(
    h: *const FaberSeriesHandle,
    out: *mut f64,
) -> FaberStatus {
    guard(|| {
        let s = handle_ref(h)?;
        write(out, s.integrate(), "out")
    })
}

/// Dimension, budget and stored coefficient count.
///
/// # Safety
/// `h` must be a live handle; each out-pointer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn faber_series_shape(
    h: *const FaberSeriesHandle,
    dim: *mut usize,
    budget: *mut u32,
    coefficients: *mut usize,
) -> FaberStatus {
    guard(|| {
        let s = handle_ref(h)?;
        if !dim.is_null() {
            dim.write(s.dim());
        }
        if !budget.is_null() {
            budget.write(s.budget());
        }
        if !coefficients.is_null() {
            coefficients.write(s.coefficient_count());
        }
        Ok(())
    })
}

/// Coefficient `c_{j,k}`; `j` and `k` hold `dim` entries each.
///
/// # Safety
/// `h` must be a live handle, `j` and `k` must point to `dim` values each,
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_series_coefficient(
    h: *const FaberSeriesHandle,
    j: *const i32,
    k: *const u64,
    dim: usize,
    out: *mut f64,
) -> FaberStatus {
    guard(|| {
        let s = handle_ref(h)?;
        if j.is_null() || k.is_null() {
            return Err(null("j/k"));
        }
        if dim != s.dim() {
            return Err(fail(FaberError::DimensionMismatch {
                expected: s.dim(),
                got: dim,
            }));
        }
        let level =
            faber_core::dyadic::LevelVector::new(std::slice::from_raw_parts(j, dim).to_vec())
                .map_err(fail)?;
        let k =
            faber_core::dyadic::TranslationVector::new(std::slice::from_raw_parts(k, dim).to_vec());
        write(out, s.get(&level, &k).map_err(fail)?, "out")
    })
}

/// `s^r_{p,q}b` norm of the stored levels; pass `q = INFINITY` for the
/// supremum over levels.
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_series_seq_norm(
    h: *const FaberSeriesHandle,
    r: f64,
    p: f64,
    q: f64,
    out: *mut f64,
) -> FaberStatus {
    guard(|| {
        let s = handle_ref(h)?;
        let q = if q == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(q)
        };
        let params = NormParams::new(r, p, q).map_err(fail)?;
        write(out, seq_norm(s, &params), "out")
    })
}

/// Serializes to the line-oriented text format. Free the result with
/// [`faber_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_series_to_text(
    h: *const FaberSeriesHandle,
    out: *mut *mut c_char,
) -> FaberStatus {
    guard(|| {
        let s = handle_ref(h)?;
        let text = CString::new(io::to_text(s)).expect("text format has no nul bytes");
        write(out, text.into_raw(), "out")
    })
}

/// Parses the text format.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_series_from_text(
    text: *const c_char,
    out: *mut *mut FaberSeriesHandle,
) -> FaberStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (FaberStatus::ParseError, format!("text is not UTF-8: {e}")))?;
        let series = io::from_text(text).map_err(fail)?;
        out.write(Box::into_raw(Box::new(FaberSeriesHandle { series })));
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn faber_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of distinct sampling nodes used by `I_n` in dimension `dim`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn faber_node_count(n: u32, dim: usize, out: *mut u64) -> FaberStatus {
    guard(|| {
        let count = node_set(n, dim).map_err(fail)?.len() as u64;
        write(out, count, "out")
    })
}
