//! C ABI for the `swar` dimension-reduction library.
//!
//! Every entry point returns a [`SwarStatus`]; on anything but
//! `SWAR_STATUS_OK` a thread-local message is available through
//! [`swar_last_error_message`]. Datasets and fits are opaque handles that
//! must be released with their matching `_free` function. All functions are
//! panic-safe: a Rust panic is caught and reported as an internal error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use swar::{
    eif_subspace, select_h_k, sif_subspace, Dataset, DirectionBasis, EstimatorConfig, Matrix,
    Method, SimConfig, Vector,
};

/// Status of a call. Mirrors the CLI exit codes: usage, data and numerical
/// errors are distinguished.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwarStatus {
    Ok = 0,
    UsageError = 1,
    DataError = 2,
    NumericalError = 3,
    NullPointer = 4,
    InvalidString = 5,
    InternalError = 99,
}

/// Estimator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwarMethod {
    Ols = 0,
    Sir = 1,
    Swar = 2,
    SwarW = 3,
    SwarT = 4,
}

impl From<SwarMethod> for Method {
    fn from(m: SwarMethod) -> Method {
        match m {
            SwarMethod::Ols => Method::Ols,
            SwarMethod::Sir => Method::Sir,
            SwarMethod::Swar => Method::Swar,
            SwarMethod::SwarW => Method::SwarW,
            SwarMethod::SwarT => Method::SwarT,
        }
    }
}

/// Opaque dataset handle.
pub struct SwarDataset(Dataset);

/// Opaque fitted-basis handle.
pub struct SwarFit(DirectionBasis);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &swar::Error) -> SwarStatus {
    set_error(&err.to_string());
    match err.exit_code() {
        1 => SwarStatus::UsageError,
        2 => SwarStatus::DataError,
        _ => SwarStatus::NumericalError,
    }
}

fn guarded<F: FnOnce() -> SwarStatus>(f: F) -> SwarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SwarStatus::InternalError
        }
    }
}

/// Message for the most recent error on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn swar_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Build a dataset from a row-major n-by-p predictor array and an n-vector
/// response.
///
/// # Safety
/// `x` must point to `n * p` readable doubles, `y` to `n` readable doubles,
/// and `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn swar_dataset_new(
    x: *const f64,
    n: usize,
    p: usize,
    y: *const f64,
    out: *mut *mut SwarDataset,
) -> SwarStatus {
    if x.is_null() || y.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SwarStatus::NullPointer;
    }
    let xs = std::slice::from_raw_parts(x, n * p);
    let ys = std::slice::from_raw_parts(y, n);
    guarded(|| {
        let xm = Matrix::from_row_slice(n, p, xs);
        let yv = Vector::from_column_slice(ys);
        match Dataset::new(xm, yv) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(SwarDataset(d)));
                SwarStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Load a dataset from a headered CSV file, splitting off the named
/// response column.
///
/// # Safety
/// `path` and `response` must be NUL-terminated strings; `out` must be a
/// valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn swar_dataset_from_csv(
    path: *const c_char,
    response: *const c_char,
    out: *mut *mut SwarDataset,
) -> SwarStatus {
    if path.is_null() || response.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SwarStatus::NullPointer;
    }
    let (path, response) = match (CStr::from_ptr(path).to_str(), CStr::from_ptr(response).to_str())
    {
        (Ok(p), Ok(r)) => (p.to_string(), r.to_string()),
        _ => {
            set_error("arguments must be valid UTF-8");
            return SwarStatus::InvalidString;
        }
    };
    guarded(|| match Dataset::from_csv(&path, &response) {
        Ok(d) => {
            *out = Box::into_raw(Box::new(SwarDataset(d)));
            SwarStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be a live handle from a constructor or null.
#[no_mangle]
pub unsafe extern "C" fn swar_dataset_rows(dataset: *const SwarDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.n())
}

/// Number of predictors, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be a live handle from a constructor or null.
#[no_mangle]
pub unsafe extern "C" fn swar_dataset_cols(dataset: *const SwarDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.p())
}

/// Release a dataset handle. Null is ignored.
///
/// # Safety
/// `dataset` must be a handle previously returned by a constructor and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn swar_dataset_free(dataset: *mut SwarDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fit an estimator. `h` is ignored for OLS; `k` is the number of
/// directions.
///
/// # Safety
/// `dataset` must be a live dataset handle; `out` must be a valid location
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn swar_fit(
    dataset: *const SwarDataset,
    method: SwarMethod,
    h: usize,
    k: usize,
    out: *mut *mut SwarFit,
) -> SwarStatus {
    let Some(data) = dataset.as_ref() else {
        set_error("null dataset");
        return SwarStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output pointer");
        return SwarStatus::NullPointer;
    }
    guarded(|| {
        let config = EstimatorConfig {
            method: method.into(),
            h: if method == SwarMethod::Ols { 1 } else { h },
            k,
        };
        match swar::fit(&data.0, &config) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(SwarFit(f)));
                SwarStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Release a fit handle. Null is ignored.
///
/// # Safety
/// `fit` must be a handle previously returned by [`swar_fit`] and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_free(fit: *mut SwarFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Predictor dimension of a fit, or 0 for a null handle.
///
/// # Safety
/// `fit` must be a live fit handle or null.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_p(fit: *const SwarFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.p())
}

/// Number of directions of a fit, or 0 for a null handle.
///
/// # Safety
/// `fit` must be a live fit handle or null.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_k(fit: *const SwarFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.k())
}

/// Slice count of a fit, or 0 for a null handle.
///
/// # Safety
/// `fit` must be a live fit handle or null.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_h(fit: *const SwarFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.h)
}

/// Copy direction `j` (0-based) into `out`, a buffer of length p.
///
/// # Safety
/// `fit` must be a live fit handle; `out` must point to `p` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_direction(
    fit: *const SwarFit,
    j: usize,
    out: *mut f64,
) -> SwarStatus {
    let Some(f) = fit.as_ref() else {
        set_error("null fit");
        return SwarStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output buffer");
        return SwarStatus::NullPointer;
    }
    if j >= f.0.k() {
        set_error("direction index out of range");
        return SwarStatus::UsageError;
    }
    let slice = std::slice::from_raw_parts_mut(out, f.0.p());
    for (dst, src) in slice.iter_mut().zip(f.0.basis.column(j).iter()) {
        *dst = *src;
    }
    SwarStatus::Ok
}

/// Copy the eigenvalues into `out`, a buffer of length k.
///
/// # Safety
/// `fit` must be a live fit handle; `out` must point to `k` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_eigenvalues(fit: *const SwarFit, out: *mut f64) -> SwarStatus {
    let Some(f) = fit.as_ref() else {
        set_error("null fit");
        return SwarStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output buffer");
        return SwarStatus::NullPointer;
    }
    let slice = std::slice::from_raw_parts_mut(out, f.0.k());
    slice.copy_from_slice(&f.0.eigenvalues);
    SwarStatus::Ok
}

/// Copy the slice weights into `out`, a buffer of length h.
///
/// # Safety
/// `fit` must be a live fit handle; `out` must point to `h` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn swar_fit_weights(fit: *const SwarFit, out: *mut f64) -> SwarStatus {
    let Some(f) = fit.as_ref() else {
        set_error("null fit");
        return SwarStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output buffer");
        return SwarStatus::NullPointer;
    }
    let slice = std::slice::from_raw_parts_mut(out, f.0.weights.len());
    slice.copy_from_slice(&f.0.weights);
    SwarStatus::Ok
}

/// Leave-one-out influence of every observation on the estimated subspace,
/// written to `out` (length n). Values are nonpositive.
///
/// # Safety
/// `dataset` must be a live dataset handle; `out` must point to `n`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swar_sif_subspace(
    dataset: *const SwarDataset,
    method: SwarMethod,
    h: usize,
    k: usize,
    out: *mut f64,
) -> SwarStatus {
    let Some(data) = dataset.as_ref() else {
        set_error("null dataset");
        return SwarStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output buffer");
        return SwarStatus::NullPointer;
    }
    guarded(|| {
        let config = EstimatorConfig {
            method: method.into(),
            h: if method == SwarMethod::Ols { 1 } else { h },
            k,
        };
        match sif_subspace(&data.0, &config) {
            Ok(report) => {
                let slice = std::slice::from_raw_parts_mut(out, data.0.n());
                slice.copy_from_slice(&report.values);
                SwarStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Plug-in influence of every observation on the estimated subspace under
/// an existing fit, written to `out` (length n).
///
/// # Safety
/// `dataset` and `fit` must be live handles; `out` must point to `n`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swar_eif_subspace(
    dataset: *const SwarDataset,
    fit: *const SwarFit,
    out: *mut f64,
) -> SwarStatus {
    let (Some(data), Some(f)) = (dataset.as_ref(), fit.as_ref()) else {
        set_error("null handle");
        return SwarStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output buffer");
        return SwarStatus::NullPointer;
    }
    guarded(|| match eif_subspace(&data.0, &f.0) {
        Ok(report) => {
            let slice = std::slice::from_raw_parts_mut(out, data.0.n());
            slice.copy_from_slice(&report.values);
            SwarStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Choose the slice count and dimension with the minimum mean absolute
/// subspace influence over the candidate grids.
///
/// # Safety
/// `dataset` must be a live dataset handle; `h_candidates` and
/// `k_candidates` must point to `n_h` and `n_k` readable values; `out_h`
/// and `out_k` must be valid locations.
#[no_mangle]
pub unsafe extern "C" fn swar_select_hk(
    dataset: *const SwarDataset,
    h_candidates: *const usize,
    n_h: usize,
    k_candidates: *const usize,
    n_k: usize,
    out_h: *mut usize,
    out_k: *mut usize,
) -> SwarStatus {
    let Some(data) = dataset.as_ref() else {
        set_error("null dataset");
        return SwarStatus::NullPointer;
    };
    if h_candidates.is_null() || k_candidates.is_null() || out_h.is_null() || out_k.is_null() {
        set_error("null pointer argument");
        return SwarStatus::NullPointer;
    }
    let hs = std::slice::from_raw_parts(h_candidates, n_h);
    let ks = std::slice::from_raw_parts(k_candidates, n_k);
    guarded(|| match select_h_k(&data.0, hs, ks) {
        Ok(sel) => {
            *out_h = sel.h;
            *out_k = sel.k;
            SwarStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Run a simulation study described by a JSON configuration and return the
/// aggregated result as a JSON string. Free the result with
/// [`swar_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_json` must be a
/// valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn swar_run_study_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> SwarStatus {
    if config_json.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return SwarStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(config_json).to_str() else {
        set_error("config must be valid UTF-8");
        return SwarStatus::InvalidString;
    };
    guarded(|| {
        let config: SimConfig = match serde_json_parse(text) {
            Ok(c) => c,
            Err(message) => {
                set_error(&message);
                return SwarStatus::UsageError;
            }
        };
        match swar::run_study(&config) {
            Ok(result) => {
                let json = serde_json_string(&result);
                *out_json = CString::new(json).unwrap_or_default().into_raw();
                SwarStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

// tiny shims so the ffi crate does not need its own serde_json dependency
fn serde_json_parse(text: &str) -> Result<SimConfig, String> {
    swar::SimConfig::from_json(text).map_err(|e| e.to_string())
}

fn serde_json_string(result: &swar::StudyResult) -> String {
    result.to_json()
}

/// Free a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned by [`swar_run_study_json`] and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
