//! C interface to `sharpset`.
//!
//! Models and reports are opaque handles created and released by this
//! library. Every fallible call returns a [`SharpsetStatus`]; the message of
//! the most recent failure on the calling thread is available from
//! [`sharpset_last_error`]. Strings returned to the caller must be released
//! with [`sharpset_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sharpset::cli::{run, RunConfig, RunError, RunReport, Solver};
use sharpset::discretize::ModelSpec;
use sharpset::sampler::SamplerConfig;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharpsetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidModel = 3,
    Refused = 4,
    OutOfRange = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharpsetSolver {
    Benson = 0,
    Cutplane = 1,
    Probabilistic = 2,
    Oracle = 3,
}

impl From<SharpsetSolver> for Solver {
    fn from(s: SharpsetSolver) -> Solver {
        match s {
            SharpsetSolver::Benson => Solver::Benson,
            SharpsetSolver::Cutplane => Solver::Cutplane,
            SharpsetSolver::Probabilistic => Solver::Probabilistic,
            SharpsetSolver::Oracle => Solver::Oracle,
        }
    }
}

/// Opaque local model.
pub struct SharpsetModel {
    spec: ModelSpec,
}

/// Opaque solver output.
pub struct SharpsetReport {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: SharpsetStatus, message: impl Into<String>) -> SharpsetStatus {
    set_error(message);
    status
}

fn guard(body: impl FnOnce() -> SharpsetStatus) -> SharpsetStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(SharpsetStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, SharpsetStatus> {
    if text.is_null() {
        return Err(fail(SharpsetStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| fail(SharpsetStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn status_of(e: &RunError) -> SharpsetStatus {
    match e {
        RunError::Spec(_) | RunError::Matrix(_) | RunError::Input(_) => SharpsetStatus::InvalidModel,
        RunError::Gate(_) | RunError::Oracle(_) => SharpsetStatus::Refused,
        RunError::Io(_) => SharpsetStatus::Io,
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sharpset_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn sharpset_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a model given as JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sharpset_model_from_json(
    json: *const c_char,
    out: *mut *mut SharpsetModel,
) -> SharpsetStatus {
    guard(|| {
        if out.is_null() {
            return fail(SharpsetStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let spec: ModelSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(SharpsetStatus::InvalidModel, e.to_string()),
        };
        if let Err(e) = spec.validate() {
            return fail(SharpsetStatus::InvalidModel, e.to_string());
        }
        *out = Box::into_raw(Box::new(SharpsetModel { spec }));
        SharpsetStatus::Ok
    })
}

/// # Safety
/// `model` must come from [`sharpset_model_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sharpset_model_free(model: *mut SharpsetModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs a solver on a model. `k` and `seed` are used by the probabilistic
/// solver only; `k = 0` keeps the default sample size.
///
/// # Safety
/// `model` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sharpset_solve(
    model: *const SharpsetModel,
    solver: SharpsetSolver,
    k: usize,
    seed: u64,
    out: *mut *mut SharpsetReport,
) -> SharpsetStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(SharpsetStatus::NullPointer, "null handle");
        }
        *out = ptr::null_mut();
        let mut config = RunConfig::new((*model).spec.clone(), solver.into());
        let defaults = SamplerConfig::default();
        config.sampler = SamplerConfig {
            k: if k == 0 { defaults.k } else { k },
            seed,
            ..defaults
        };
        match run(&config) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(SharpsetReport { report }));
                SharpsetStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `report` must come from [`sharpset_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sharpset_report_free(report: *mut SharpsetReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of inequalities after redundancy elimination, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sharpset_report_count(report: *const SharpsetReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.reduced.len())
}

/// Length of every inequality vector (the number of outcomes `D^T`).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sharpset_report_dim(report: *const SharpsetReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.dims.rows)
}

/// Copies inequality `index` into `num`/`den`, each of length `len`. Fails
/// with `OutOfRange` when the index or length is wrong or a coefficient does
/// not fit in 64 bits.
///
/// # Safety
/// `num` and `den` must point to `len` writable `int64_t` values.
#[no_mangle]
pub unsafe extern "C" fn sharpset_report_vector(
    report: *const SharpsetReport,
    index: usize,
    num: *mut i64,
    den: *mut i64,
    len: usize,
) -> SharpsetStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(SharpsetStatus::NullPointer, "null report");
        };
        if num.is_null() || den.is_null() {
            return fail(SharpsetStatus::NullPointer, "null output buffer");
        }
        let Some(y) = r.report.reduced.get(index) else {
            return fail(SharpsetStatus::OutOfRange, format!("no inequality {index}"));
        };
        if y.len() != len {
            return fail(SharpsetStatus::OutOfRange, format!("vector has length {}", y.len()));
        }
        let nums = std::slice::from_raw_parts_mut(num, len);
        let dens = std::slice::from_raw_parts_mut(den, len);
        for (i, c) in y.iter().enumerate() {
            let Some((n, d)) = c.as_small() else {
                return fail(SharpsetStatus::OutOfRange, format!("coefficient {c} exceeds 64 bits"));
            };
            nums[i] = n;
            dens[i] = d;
        }
        SharpsetStatus::Ok
    })
}

/// Rendered form of inequality `index`, or null when out of range.
///
/// # Safety
/// `report` must be null or a live handle. Release the result with
/// [`sharpset_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sharpset_report_rendered(report: *const SharpsetReport, index: usize) -> *mut c_char {
    match report.as_ref().and_then(|r| r.report.rendered.get(index)) {
        Some(s) => into_c_string(s.clone()),
        None => ptr::null_mut(),
    }
}

/// Whole report as JSON, or null for a null handle.
///
/// # Safety
/// `report` must be null or a live handle. Release the result with
/// [`sharpset_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sharpset_report_json(report: *const SharpsetReport) -> *mut c_char {
    match report.as_ref().map(|r| serde_json::to_string(&r.report)) {
        Some(Ok(s)) => into_c_string(s),
        _ => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn sharpset_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
