//! C ABI for the adflux solver.
//!
//! Problems and runs are opaque handles owned by the caller and released with
//! the matching `*_free` function. Every fallible call returns an
//! [`AdfluxStatus`]; on failure, [`adflux_last_error`] describes the cause on
//! the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use adflux::config::{Problem, RunConfig};
use adflux::experiment::{execute, Overrides, RunResult, RunSpec};
use adflux::reference::ReferenceId;
use adflux::{Error, Grid1D};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdfluxStatus {
    Ok = 0,
    InvalidInput = 1,
    RootFailure = 2,
    InvariantViolation = 3,
    UnsupportedReference = 4,
    Config = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A resolved problem: flux model, initial data, domain and final time.
pub struct AdfluxProblem {
    inner: Problem,
}

/// The outcome of running a problem on one grid.
pub struct AdfluxRun {
    result: RunResult,
    x: Vec<f64>,
}

/// Constants a run used.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdfluxConstants {
    pub m_cells: usize,
    pub dx: f64,
    pub alpha_bar: f64,
    pub m_bound: f64,
    pub lambda: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub t_final: f64,
    pub tv_beta0: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: AdfluxStatus, msg: impl Into<String>) -> AdfluxStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> AdfluxStatus {
    let status = match &e {
        Error::InvalidInput(_) => AdfluxStatus::InvalidInput,
        Error::RootFailure(_) => AdfluxStatus::RootFailure,
        Error::InvariantViolation(_) => AdfluxStatus::InvariantViolation,
        Error::UnsupportedReference(_) => AdfluxStatus::UnsupportedReference,
        Error::Config(_) => AdfluxStatus::Config,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> AdfluxStatus) -> AdfluxStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(AdfluxStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, AdfluxStatus> {
    if s.is_null() {
        return Err(fail(AdfluxStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(AdfluxStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message describing the last failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn adflux_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn adflux_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a problem from a TOML configuration document.
///
/// # Safety
/// `toml` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adflux_problem_from_toml(toml: *const c_char, out: *mut *mut AdfluxProblem) -> AdfluxStatus {
    guard(|| {
        if out.is_null() {
            return fail(AdfluxStatus::NullPointer, "out is null");
        }
        let text = match read_str(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_toml(text).and_then(|c| c.resolve()) {
            Ok(inner) => {
                store(out, AdfluxProblem { inner });
                AdfluxStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds one of the built-in benchmark problems from its reference id.
///
/// # Safety
/// `id` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adflux_problem_from_reference(id: *const c_char, out: *mut *mut AdfluxProblem) -> AdfluxStatus {
    guard(|| {
        if out.is_null() {
            return fail(AdfluxStatus::NullPointer, "out is null");
        }
        let id = match read_str(id, "id") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let parsed: ReferenceId = match id.parse() {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let text = format!("[flux]\nbuiltin = \"{parsed}\"\n[run]\nm_cells = 100\nreference = \"{parsed}\"\n");
        match RunConfig::from_toml(&text).and_then(|c| c.resolve()) {
            Ok(inner) => {
                store(out, AdfluxProblem { inner });
                AdfluxStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn adflux_problem_free(problem: *mut AdfluxProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Final time of the problem.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adflux_problem_t_final(problem: *const AdfluxProblem, out: *mut f64) -> AdfluxStatus {
    if problem.is_null() || out.is_null() {
        return fail(AdfluxStatus::NullPointer, "null argument");
    }
    *out = (*problem).inner.t_final;
    AdfluxStatus::Ok
}

/// Evaluates the flux `A(x, u)`.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adflux_problem_flux(problem: *const AdfluxProblem, x: f64, u: f64, out: *mut f64) -> AdfluxStatus {
    if problem.is_null() || out.is_null() {
        return fail(AdfluxStatus::NullPointer, "null argument");
    }
    guard(|| match (*problem).inner.model.eval_flux(x, u) {
        Ok(v) => {
            *out = v;
            AdfluxStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// Runs the problem to its final time on `m_cells` cells. A run that stops
/// on an invariant violation is still returned; query it with
/// [`adflux_run_passed`].
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adflux_run(problem: *const AdfluxProblem, m_cells: usize, out: *mut *mut AdfluxRun) -> AdfluxStatus {
    if problem.is_null() || out.is_null() {
        return fail(AdfluxStatus::NullPointer, "null argument");
    }
    guard(|| {
        let p = &(*problem).inner;
        let grid = match Grid1D::new(p.domain.0, p.domain.1, m_cells) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        let x = grid.centers();
        let initial = |x: f64| p.initial.eval(x);
        let spec = RunSpec {
            model: &p.model,
            initial: &initial,
            reference: p.reference.as_ref(),
            grid,
            t_final: p.t_final,
            cfl_safety: p.cfl_safety,
            overrides: Overrides::default(),
            snapshot_times: Vec::new(),
            entropy_checks: false,
        };
        match execute(&spec) {
            Ok(result) => {
                store(out, AdfluxRun { result, x });
                AdfluxStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a run. Null is ignored.
///
/// # Safety
/// `run` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn adflux_run_free(run: *mut AdfluxRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of interior cells of the run's grid.
///
/// # Safety
/// `run` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn adflux_run_cell_count(run: *const AdfluxRun) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).x.len()
}

/// Writes 1 to `out` when the run finished with every monitored check
/// satisfied, 0 otherwise.
///
/// # Safety
/// `run` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adflux_run_passed(run: *const AdfluxRun, out: *mut i32) -> AdfluxStatus {
    if run.is_null() || out.is_null() {
        return fail(AdfluxStatus::NullPointer, "null argument");
    }
    *out = i32::from((*run).result.passed());
    AdfluxStatus::Ok
}

/// Copies cell centers and final values into caller buffers of length `len`.
/// Either buffer may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn adflux_run_solution(run: *const AdfluxRun, x: *mut f64, u: *mut f64, len: usize) -> AdfluxStatus {
    if run.is_null() {
        return fail(AdfluxStatus::NullPointer, "run is null");
    }
    let r = &*run;
    let Some(state) = &r.result.final_state else {
        return fail(
            AdfluxStatus::InvariantViolation,
            r.result.failure.clone().unwrap_or_else(|| "run has no final state".into()),
        );
    };
    let n = r.x.len();
    if len < n {
        return fail(AdfluxStatus::BufferTooSmall, format!("need {n} values, got {len}"));
    }
    if !x.is_null() {
        std::ptr::copy_nonoverlapping(r.x.as_ptr(), x, n);
    }
    if !u.is_null() {
        std::ptr::copy_nonoverlapping(state.u.as_ptr(), u, n);
    }
    AdfluxStatus::Ok
}

/// L1 error against the reference solution at the final time.
///
/// # Safety
/// `run` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adflux_run_l1_error(run: *const AdfluxRun, out: *mut f64) -> AdfluxStatus {
    if run.is_null() || out.is_null() {
        return fail(AdfluxStatus::NullPointer, "null argument");
    }
    match (*run).result.l1_error {
        Some(e) => {
            *out = e;
            AdfluxStatus::Ok
        }
        None => fail(AdfluxStatus::UnsupportedReference, "no reference solution at the final time"),
    }
}

/// Copies the run constants into `out`.
///
/// # Safety
/// `run` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adflux_run_constants(run: *const AdfluxRun, out: *mut AdfluxConstants) -> AdfluxStatus {
    if run.is_null() || out.is_null() {
        return fail(AdfluxStatus::NullPointer, "null argument");
    }
    let c = &(*run).result.constants;
    *out = AdfluxConstants {
        m_cells: c.m_cells,
        dx: c.dx,
        alpha_bar: c.alpha_bar,
        m_bound: c.m_bound,
        lambda: c.lambda,
        dt: c.dt,
        n_steps: c.n_steps,
        t_final: c.t_final,
        tv_beta0: c.tv_beta0,
    };
    AdfluxStatus::Ok
}
