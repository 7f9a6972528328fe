//! C ABI for cnslab.
//!
//! Objects are opaque handles created by `*_new` style functions and released
//! with the matching `*_free`. Every fallible call returns a [`CnsStatus`];
//! on failure the message is available from [`cns_last_error_message`] on the
//! same thread until the next failing call. Panics never cross the boundary;
//! they are reported as `CNS_STATUS_PANIC`.
//!
//! Fields cross the boundary as physical samples on the `n × n` grid, row
//! major with the first coordinate slowest, `x_j = −L/2 + j·L/n`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use cnslab::config::{parse_config, run};
use cnslab::harness::registry;
use cnslab::profiles::{FluidParams, PressureLaw};
use cnslab::solver::{linear_evolution, simulate, SolverConfig};
use cnslab::spectral::{transform, Grid, State};
use cnslab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad sizes, parameters, times or other argument values.
    InvalidArgument = 2,
    /// The run manifest did not parse or named an unknown experiment.
    Config = 3,
    /// The time step violates the acoustic CFL bound.
    Cfl = 4,
    /// The density approached vacuum.
    Vacuum = 5,
    /// A run stopped early (vacuum or energy blow-up).
    Aborted = 6,
    /// File system or serialization failure.
    Io = 7,
    /// Any other numerical failure.
    Numerical = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// Fluid parameters with the isentropic law `P(ρ) = ρ^γ/γ`.
pub struct CnsParams(FluidParams);

/// A state `(ρ̃, m₁, m₂)` on a periodic grid.
pub struct CnsState(State);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CnsStatus {
    match e {
        Error::Config { .. } | Error::UnknownExperiment(_) => CnsStatus::Config,
        Error::Cfl { .. } => CnsStatus::Cfl,
        Error::Vacuum { .. } => CnsStatus::Vacuum,
        Error::Aborted { .. } => CnsStatus::Aborted,
        Error::Io(_) | Error::Json(_) | Error::Snapshot(_) => CnsStatus::Io,
        Error::GridSize(_)
        | Error::BoxLength(_)
        | Error::Shape { .. }
        | Error::GridMismatch
        | Error::Exponent(_)
        | Error::SobolevIndex(_)
        | Error::MultiIndexOrder(_)
        | Error::Time { .. }
        | Error::Params(_)
        | Error::InvalidArgument(_) => CnsStatus::InvalidArgument,
        _ => CnsStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CnsStatus, String)>) -> CnsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CnsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CnsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (CnsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CnsStatus, String) {
    (CnsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CnsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cns_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).expect("version"))
        .as_ptr()
}

/// Message of the last failure on this thread, or null if there was none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates fluid parameters.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cns_params_new(
    mu: f64,
    lambda: f64,
    rho_star: f64,
    gamma: f64,
    out: *mut *mut CnsParams,
) -> CnsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if gamma.is_nan() || gamma < 1.0 {
            return Err((
                CnsStatus::InvalidArgument,
                format!("isentropic exponent must be at least 1, got {gamma}"),
            ));
        }
        let p =
            FluidParams::new(mu, lambda, rho_star, PressureLaw::isentropic(gamma)).map_err(lib)?;
        put(out, CnsParams(p));
        Ok(())
    })
}

/// Sound speed `c = √P′(ρ*)`.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cns_params_sound_speed(
    params: *const CnsParams,
    out: *mut f64,
) -> CnsStatus {
    guard(|| {
        let p = deref(params, "params")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.0.c();
        Ok(())
    })
}

/// Releases a parameter handle; null is ignored.
///
/// # Safety
/// `params` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cns_params_free(params: *mut CnsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Builds a state from physical samples of `ρ̃`, `m₁`, `m₂`, each `n·n`
/// values.
///
/// # Safety
/// The three arrays must hold `n·n` readable doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cns_state_new(
    n: usize,
    length: f64,
    rho: *const f64,
    m1: *const f64,
    m2: *const f64,
    out: *mut *mut CnsState,
) -> CnsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = Grid::new(n, length).map_err(lib)?;
        let field = |p: *const f64, what: &str| {
            if p.is_null() {
                return Err(null(what));
            }
            transform(grid, std::slice::from_raw_parts(p, grid.len())).map_err(lib)
        };
        let state =
            State::new(field(rho, "rho")?, [field(m1, "m1")?, field(m2, "m2")?]).map_err(lib)?;
        put(out, CnsState(state));
        Ok(())
    })
}

/// Grid size and box length of a state.
///
/// # Safety
/// `state` must be a live handle; `n` and `length` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cns_state_grid(
    state: *const CnsState,
    n: *mut usize,
    length: *mut f64,
) -> CnsStatus {
    guard(|| {
        let s = deref(state, "state")?;
        if n.is_null() || length.is_null() {
            return Err(null("n/length"));
        }
        *n = s.0.grid().n();
        *length = s.0.grid().length();
        Ok(())
    })
}

/// Copies the physical samples into caller buffers of `len` doubles each;
/// `len` must equal `n·n`. Any of the buffers may be null to skip it.
///
/// # Safety
/// `state` must be a live handle; non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cns_state_values(
    state: *const CnsState,
    rho: *mut f64,
    m1: *mut f64,
    m2: *mut f64,
    len: usize,
) -> CnsStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let need = s.0.grid().len();
        if len != need {
            return Err(lib(Error::Shape {
                expected: need,
                got: len,
            }));
        }
        for (dst, f) in [rho, m1, m2].into_iter().zip(s.0.fields()) {
            if !dst.is_null() {
                std::slice::from_raw_parts_mut(dst, len).copy_from_slice(&f.values());
            }
        }
        Ok(())
    })
}

/// Releases a state handle; null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cns_state_free(state: *mut CnsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Exact linearized evolution `S(t)⋆X₀`.
///
/// # Safety
/// `state` and `params` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cns_linear_evolution(
    state: *const CnsState,
    params: *const CnsParams,
    t: f64,
    out: *mut *mut CnsState,
) -> CnsStatus {
    guard(|| {
        let (s, p) = (deref(state, "state")?, deref(params, "params")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let y = linear_evolution(&s.0, t, &p.0).map_err(lib)?;
        put(out, CnsState(y));
        Ok(())
    })
}

/// Integrates the compressible system from `state` to `t_end` and returns
/// the final state. `dt <= 0` selects the default step; `nonlinear = false`
/// keeps only the exact linear flow.
///
/// # Safety
/// `state` and `params` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cns_simulate(
    state: *const CnsState,
    params: *const CnsParams,
    t_end: f64,
    dt: f64,
    nonlinear: bool,
    out: *mut *mut CnsState,
) -> CnsStatus {
    guard(|| {
        let (s, p) = (deref(state, "state")?, deref(params, "params")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = SolverConfig::new(*s.0.grid(), p.0, t_end);
        if dt > 0.0 {
            cfg.dt = dt;
        }
        cfg.nonlinear = nonlinear;
        let mut traj = simulate(&s.0, &cfg).map_err(lib)?;
        let last = traj.states.pop().expect("at least the initial snapshot");
        put(out, CnsState(last));
        Ok(())
    })
}

/// Number of registered experiments.
#[no_mangle]
pub extern "C" fn cns_experiment_count() -> usize {
    registry().len()
}

/// Name of experiment `i` as a static string, or null when out of range.
#[no_mangle]
pub extern "C" fn cns_experiment_name(i: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES
        .get_or_init(|| {
            registry()
                .iter()
                .map(|e| CString::new(e.name).expect("ascii name"))
                .collect()
        })
        .get(i)
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Runs the experiments of a `key = value` manifest and writes its output
/// files. `all_pass` receives whether every report passed.
///
/// # Safety
/// `config` must be a NUL-terminated string and `all_pass` valid.
#[no_mangle]
pub unsafe extern "C" fn cns_run(config: *const c_char, all_pass: *mut bool) -> CnsStatus {
    guard(|| {
        if config.is_null() || all_pass.is_null() {
            return Err(null("config/all_pass"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| (CnsStatus::Config, format!("manifest is not UTF-8: {e}")))?;
        let manifest = parse_config(text).map_err(lib)?;
        *all_pass = run(&manifest, &mut std::io::sink()).map_err(lib)?;
        Ok(())
    })
}
