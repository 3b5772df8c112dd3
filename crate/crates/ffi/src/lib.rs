//! C ABI for the ensnet ensemble classifier.
//!
//! Handles are opaque pointers owned by the library: every `*_free` accepts
//! null. Functions return [`EnsnetStatus`]; on any non-OK status,
//! [`ensnet_last_error_message`] holds a description valid until the next
//! ensnet call on the same thread. The generated header lands in
//! `include/ensnet.h` at build time.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, size_t};

use ensnet::artifact::{load_ensemble_from_path, save_ensemble_to_path};
use ensnet::data::{LabeledPoint, TrainingSet};
use ensnet::ensemble::GibbsEnsemble;
use ensnet::error::Error;
use ensnet::RunConfig;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsnetStatus {
    Ok = 0,
    /// A pointer was null or an argument was out of range.
    InvalidArgument = 1,
    /// The run configuration failed to parse or validate.
    Config = 2,
    /// Rejection sampling exhausted max_attempts.
    AcceptanceTooLow = 3,
    /// The filesystem said no.
    Io = 4,
    /// The dataset is malformed.
    Data = 5,
    /// An enumeration or resource cap was exceeded.
    ResourceLimit = 6,
    /// The artifact failed validation.
    Artifact = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

/// Opaque handle to a loaded training set.
pub struct EnsnetTrainingSet(TrainingSet);

/// Opaque handle to a built or loaded ensemble.
pub struct EnsnetEnsemble(GibbsEnsemble);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::default());
}

fn status_of(err: &Error) -> EnsnetStatus {
    match err {
        Error::Dimension(_) | Error::Domain(_) | Error::Parameter(_) => {
            EnsnetStatus::InvalidArgument
        }
        Error::Config(_) => EnsnetStatus::Config,
        Error::Dataset { .. } => EnsnetStatus::Data,
        Error::AcceptanceTooLow { .. } => EnsnetStatus::AcceptanceTooLow,
        Error::ResourceLimit { .. } => EnsnetStatus::ResourceLimit,
        Error::Artifact(_) => EnsnetStatus::Artifact,
        Error::Io(_) => EnsnetStatus::Io,
    }
}

fn fail(err: Error) -> EnsnetStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn invalid(msg: &str) -> EnsnetStatus {
    set_error(msg.to_string());
    EnsnetStatus::InvalidArgument
}

/// Run a closure, translating panics into `Internal` instead of unwinding
/// across the ABI.
fn guarded(f: impl FnOnce() -> EnsnetStatus) -> EnsnetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            EnsnetStatus::Internal
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ensnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. Empty string when
/// the last call succeeded; the pointer is valid until the next ensnet call
/// on the same thread.
#[no_mangle]
pub extern "C" fn ensnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Load a labeled CSV dataset (`x1,...,xN,label` header).
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ensnet_training_set_load(
    path: *const c_char,
    out: *mut *mut EnsnetTrainingSet,
) -> EnsnetStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("out pointer is null");
        }
        let Some(path) = cstr_arg(path) else {
            return invalid("path is null or not UTF-8");
        };
        match ensnet::data::load_dataset(path) {
            Ok(ts) => {
                clear_error();
                *out = Box::into_raw(Box::new(EnsnetTrainingSet(ts)));
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Build a training set from a row-major coordinate array of
/// `n_points * input_dim` doubles plus one 0/1 label per point.
///
/// # Safety
/// `xs` must hold `n_points * input_dim` doubles, `labels` `n_points`
/// bytes, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ensnet_training_set_from_arrays(
    xs: *const f64,
    n_points: size_t,
    input_dim: size_t,
    labels: *const u8,
    out: *mut *mut EnsnetTrainingSet,
) -> EnsnetStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("out pointer is null");
        }
        if xs.is_null() || labels.is_null() {
            return invalid("xs or labels is null");
        }
        if n_points == 0 || input_dim == 0 {
            return invalid("n_points and input_dim must be positive");
        }
        let coords = std::slice::from_raw_parts(xs, n_points * input_dim);
        let labels = std::slice::from_raw_parts(labels, n_points);
        let points: Result<Vec<LabeledPoint>, Error> = coords
            .chunks_exact(input_dim)
            .zip(labels)
            .map(|(chunk, &label)| LabeledPoint::new(chunk.to_vec(), label))
            .collect();
        let ts = points.and_then(TrainingSet::new);
        match ts {
            Ok(ts) => {
                clear_error();
                *out = Box::into_raw(Box::new(EnsnetTrainingSet(ts)));
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `ts` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ensnet_training_set_len(ts: *const EnsnetTrainingSet) -> size_t {
    if ts.is_null() {
        return 0;
    }
    (*ts).0.len()
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `ts` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ensnet_training_set_input_dim(ts: *const EnsnetTrainingSet) -> size_t {
    if ts.is_null() {
        return 0;
    }
    (*ts).0.input_dim()
}

/// # Safety
/// `ts` must be a pointer from this library, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ensnet_training_set_free(ts: *mut EnsnetTrainingSet) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}

/// Build an ensemble from a JSON run config (same document the CLI reads).
///
/// # Safety
/// `config_json` must be NUL-terminated, `ts` a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_build(
    config_json: *const c_char,
    ts: *const EnsnetTrainingSet,
    out: *mut *mut EnsnetEnsemble,
) -> EnsnetStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("out pointer is null");
        }
        if ts.is_null() {
            return invalid("training set handle is null");
        }
        let Some(json) = cstr_arg(config_json) else {
            return invalid("config_json is null or not UTF-8");
        };
        let config = match RunConfig::from_json(json) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match ensnet::ensemble::build(&(*ts).0, &config) {
            Ok(ens) => {
                clear_error();
                *out = Box::into_raw(Box::new(EnsnetEnsemble(ens)));
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Load an ensemble artifact file, re-validating every invariant.
///
/// # Safety
/// `path` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_load(
    path: *const c_char,
    out: *mut *mut EnsnetEnsemble,
) -> EnsnetStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("out pointer is null");
        }
        let Some(path) = cstr_arg(path) else {
            return invalid("path is null or not UTF-8");
        };
        match load_ensemble_from_path(path) {
            Ok(ens) => {
                clear_error();
                *out = Box::into_raw(Box::new(EnsnetEnsemble(ens)));
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Write the ensemble artifact to `path`.
///
/// # Safety
/// `ens` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_save(
    ens: *const EnsnetEnsemble,
    path: *const c_char,
) -> EnsnetStatus {
    guarded(|| {
        if ens.is_null() {
            return invalid("ensemble handle is null");
        }
        let Some(path) = cstr_arg(path) else {
            return invalid("path is null or not UTF-8");
        };
        match save_ensemble_to_path(&(*ens).0, path) {
            Ok(()) => {
                clear_error();
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of members, or 0 for a null handle.
///
/// # Safety
/// `ens` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_member_count(ens: *const EnsnetEnsemble) -> size_t {
    if ens.is_null() {
        return 0;
    }
    (*ens).0.len()
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `ens` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_input_dim(ens: *const EnsnetEnsemble) -> size_t {
    if ens.is_null() {
        return 0;
    }
    (*ens).0.input_dim()
}

/// Weighted-average value and standard error at a point.
///
/// # Safety
/// `x` must hold `len` doubles; `out_value` and `out_std_error` are written
/// on success and may not be null.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_evaluate(
    ens: *const EnsnetEnsemble,
    x: *const f64,
    len: size_t,
    out_value: *mut f64,
    out_std_error: *mut f64,
) -> EnsnetStatus {
    guarded(|| {
        if ens.is_null() {
            return invalid("ensemble handle is null");
        }
        if x.is_null() || out_value.is_null() || out_std_error.is_null() {
            return invalid("x or output pointer is null");
        }
        let point = std::slice::from_raw_parts(x, len);
        match (*ens).0.evaluate(point) {
            Ok(est) => {
                clear_error();
                *out_value = est.value;
                *out_std_error = est.std_error;
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Class decision at a point: 1 iff the averaged value is at least 0.5.
///
/// # Safety
/// `x` must hold `len` doubles; `out_label` may not be null.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_predict(
    ens: *const EnsnetEnsemble,
    x: *const f64,
    len: size_t,
    out_label: *mut u8,
) -> EnsnetStatus {
    guarded(|| {
        if ens.is_null() {
            return invalid("ensemble handle is null");
        }
        if x.is_null() || out_label.is_null() {
            return invalid("x or output pointer is null");
        }
        let point = std::slice::from_raw_parts(x, len);
        match (*ens).0.predict(point) {
            Ok(label) => {
                clear_error();
                *out_label = label;
                EnsnetStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `ens` must be a pointer from this library, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ensnet_ensemble_free(ens: *mut EnsnetEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}
