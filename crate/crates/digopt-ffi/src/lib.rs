//! C ABI for the digopt excavation trajectory optimizer.
//!
//! The interface works on two opaque handles: `DigoptScenario` (a loaded,
//! validated scenario) and `DigoptResult` (a finished run). Every function
//! returns a `DigoptStatus` code; `digopt_last_error_message` retrieves a
//! thread-local description of the most recent failure. Handles must be
//! released with their matching `_free` function.
//!
//! The generated header lands in `include/digopt.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char, c_double, c_int};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::{Path, PathBuf};

use digopt::scenario::{self, ResultBundle, ScenarioError, ScenarioSpec};
use digopt::solver::SolverStatus;

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigoptStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ScenarioError = 3,
    SeedError = 4,
    SolverNotConverged = 5,
    IoError = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

/// Opaque handle to a loaded scenario.
pub struct DigoptScenario {
    spec: ScenarioSpec,
}

/// Opaque handle to a finished optimization run.
pub struct DigoptResult {
    bundle: ResultBundle,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(err: &ScenarioError) -> DigoptStatus {
    match err {
        ScenarioError::Io { .. } => DigoptStatus::IoError,
        ScenarioError::Parse { .. } | ScenarioError::Validation { .. } => {
            DigoptStatus::ScenarioError
        }
        ScenarioError::Seed(_) => DigoptStatus::SeedError,
        ScenarioError::Eval(_) | ScenarioError::Trajectory(_) => DigoptStatus::ScenarioError,
    }
}

fn guard<F: FnOnce() -> DigoptStatus>(f: F) -> DigoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("panic inside digopt");
            DigoptStatus::Panic
        }
    }
}

/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a `DigoptScenario*` slot.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_scenario_load(
    path: *const c_char,
    out: *mut *mut DigoptScenario,
) -> DigoptStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            set_last_error("null argument");
            return DigoptStatus::NullArgument;
        }
        let raw = unsafe { CStr::from_ptr(path) };
        let Ok(utf8) = raw.to_str() else {
            set_last_error("path is not valid UTF-8");
            return DigoptStatus::InvalidUtf8;
        };
        match scenario::load_scenario(Path::new(utf8)) {
            Ok(spec) => {
                unsafe { *out = Box::into_raw(Box::new(DigoptScenario { spec })) };
                DigoptStatus::Ok
            }
            Err(e) => {
                set_last_error(&e.to_string());
                status_for(&e)
            }
        }
    })
}

/// # Safety
/// `scenario` must come from `digopt_scenario_load` and not be freed twice.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_scenario_free(scenario: *mut DigoptScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Seed and optimize. `out_dir` may be NULL to skip writing result files.
/// A run that finishes without converging still produces a result handle;
/// the return code is `SolverNotConverged`.
///
/// # Safety
/// `scenario` must be a live handle; `out_dir`, when non-NULL, a valid
/// NUL-terminated string; `out` a valid pointer to a `DigoptResult*` slot.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_run(
    scenario: *const DigoptScenario,
    out_dir: *const c_char,
    out: *mut *mut DigoptResult,
) -> DigoptStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            set_last_error("null argument");
            return DigoptStatus::NullArgument;
        }
        let spec = unsafe { &(*scenario).spec };
        let dir: Option<PathBuf> = if out_dir.is_null() {
            None
        } else {
            let raw = unsafe { CStr::from_ptr(out_dir) };
            match raw.to_str() {
                Ok(s) => Some(PathBuf::from(s)),
                Err(_) => {
                    set_last_error("out_dir is not valid UTF-8");
                    return DigoptStatus::InvalidUtf8;
                }
            }
        };
        match scenario::run(spec, dir.as_deref()) {
            Ok(bundle) => {
                let converged = bundle.report.status == SolverStatus::Converged;
                unsafe { *out = Box::into_raw(Box::new(DigoptResult { bundle })) };
                if converged {
                    DigoptStatus::Ok
                } else {
                    set_last_error("solver did not converge");
                    DigoptStatus::SolverNotConverged
                }
            }
            Err(e) => {
                set_last_error(&e.to_string());
                status_for(&e)
            }
        }
    })
}

/// # Safety
/// `result` must come from `digopt_run` and not be freed twice.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_free(result: *mut DigoptResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> DigoptStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return DigoptStatus::NullArgument;
    }
    unsafe { *out = value };
    DigoptStatus::Ok
}

/// Solver status of a run: 0 converged, 1 max iterations, 2 infeasible
/// stall.
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_status(
    result: *const DigoptResult,
    out: *mut c_int,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let code = match unsafe { &(*result).bundle }.report.status {
        SolverStatus::Converged => 0,
        SolverStatus::MaxIterations => 1,
        SolverStatus::InfeasibleStall => 2,
    };
    unsafe { write_out(out, code) }
}

/// Final torque cost (sum of squared articulated torque norms).
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_final_cost(
    result: *const DigoptResult,
    out: *mut c_double,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let cost = unsafe { &(*result).bundle }.final_cost;
    unsafe { write_out(out, cost) }
}

/// Total trajectory duration in seconds.
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_total_duration(
    result: *const DigoptResult,
    out: *mut c_double,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let duration = unsafe { &(*result).bundle }.trajectory.total_duration();
    unsafe { write_out(out, duration) }
}

/// Swept volume of the optimized trajectory (m^3).
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_swept_volume(
    result: *const DigoptResult,
    out: *mut c_double,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let volume = unsafe { &(*result).bundle }.final_volume;
    unsafe { write_out(out, volume) }
}

/// Largest constraint violation of the final trajectory.
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_max_violation(
    result: *const DigoptResult,
    out: *mut c_double,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let violation = unsafe { &(*result).bundle }.report.final_max_violation();
    unsafe { write_out(out, violation) }
}

/// Number of keypoints in the optimized trajectory.
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_num_keypoints(
    result: *const DigoptResult,
    out: *mut usize,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let n = unsafe { &(*result).bundle }.trajectory.keypoints().len();
    unsafe { write_out(out, n) }
}

/// Joint angles of keypoint `index`, written as [swing, boom, stick,
/// bucket] into `out[0..4]`.
///
/// # Safety
/// `result` must be a live handle; `out` must point to at least 4 doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_keypoint(
    result: *const DigoptResult,
    index: usize,
    out: *mut c_double,
) -> DigoptStatus {
    if result.is_null() || out.is_null() {
        set_last_error("null argument");
        return DigoptStatus::NullArgument;
    }
    let keypoints = unsafe { &(*result).bundle }.trajectory.keypoints();
    let Some(k) = keypoints.get(index) else {
        set_last_error("keypoint index out of range");
        return DigoptStatus::IndexOutOfRange;
    };
    for i in 0..4 {
        unsafe { *out.add(i) = k[i] };
    }
    DigoptStatus::Ok
}

/// Duration of segment `index` in seconds.
///
/// # Safety
/// `result` must be a live handle, `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn digopt_result_interval(
    result: *const DigoptResult,
    index: usize,
    out: *mut c_double,
) -> DigoptStatus {
    if result.is_null() {
        set_last_error("null result handle");
        return DigoptStatus::NullArgument;
    }
    let intervals = unsafe { &(*result).bundle }.trajectory.intervals();
    let Some(t) = intervals.get(index) else {
        set_last_error("interval index out of range");
        return DigoptStatus::IndexOutOfRange;
    };
    unsafe { write_out(out, *t) }
}

/// Message describing the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn digopt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
