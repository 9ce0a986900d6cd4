//! C ABI for the treecount model solver and simulator.
//!
//! Results live behind opaque handles that the caller frees with the matching
//! `*_free` function. Every fallible entry point returns a [`TcStatus`]; on
//! failure a description is available from [`tc_last_error_message`] on the
//! same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use treecount::{model, sim, Error, ModelParams, ModelSolution, SimConfig, SimResult};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    NotConverged = 3,
    OutOfRange = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TcModelParams {
    pub nodes: f64,
    pub mean_degree: f64,
    pub ratio: f64,
    pub epsilon: f64,
    pub max_iter: u64,
    pub fp_tol: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TcModelLevel {
    pub pmin: f64,
    pub nx: f64,
    pub nxus: f64,
    pub ax: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TcSimConfig {
    pub nodes: u64,
    pub mean_degree: f64,
    pub ratio: f64,
    pub fail_rate: f64,
    pub seed: u64,
    pub warmup_time: f64,
    pub sample_interval: f64,
    pub num_samples: u64,
    pub max_level: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TcSimLevel {
    pub nx_mean: f64,
    pub nx_se: f64,
    pub axn_mean: f64,
    pub axn_se: f64,
    pub nxus_frac_mean: f64,
    pub nxus_frac_se: f64,
}

/// Opaque solved model.
pub struct TcModel {
    sol: ModelSolution,
}

/// Opaque reduced simulation result.
pub struct TcSimulation {
    res: SimResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TcStatus, msg: &str) -> TcStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> TcStatus {
    let code = match e {
        Error::InvalidConfig(_) | Error::Truncation { .. } => TcStatus::InvalidConfig,
        Error::NotConverged { .. } => TcStatus::NotConverged,
        _ => TcStatus::Internal,
    };
    fail(code, &e.to_string())
}

fn guard<F: FnOnce() -> TcStatus + UnwindSafe>(f: F) -> TcStatus {
    catch_unwind(f).unwrap_or_else(|_| fail(TcStatus::Internal, "internal panic"))
}

fn usize_of(v: u64, what: &str) -> Result<usize, TcStatus> {
    usize::try_from(v).map_err(|_| fail(TcStatus::InvalidConfig, &format!("{what} too large")))
}

/// Defaults for a model point: ε = 1e−9, 10 000 iterations, tolerance 1e−12.
#[no_mangle]
pub extern "C" fn tc_model_params_default(
    nodes: f64,
    mean_degree: f64,
    ratio: f64,
) -> TcModelParams {
    let p = ModelParams::new(nodes, mean_degree, ratio);
    TcModelParams {
        nodes: p.nodes,
        mean_degree: p.mean_degree,
        ratio: p.ratio,
        epsilon: p.epsilon,
        max_iter: p.max_iter as u64,
        fp_tol: p.fp_tol,
    }
}

/// Solves the model. Fails with `NotConverged` (and no handle) if the fixed
/// point does not settle within `max_iter` sweeps.
///
/// # Safety
/// `params` must be null or point to a valid `TcModelParams`; `out` must be
/// null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_model_predict(
    params: *const TcModelParams,
    out: *mut *mut TcModel,
) -> TcStatus {
    if params.is_null() || out.is_null() {
        return fail(TcStatus::NullPointer, "null argument");
    }
    *out = ptr::null_mut();
    let p = *params;
    guard(move || {
        let max_iter = match usize_of(p.max_iter, "max_iter") {
            Ok(v) => v,
            Err(s) => return s,
        };
        let params = ModelParams {
            nodes: p.nodes,
            mean_degree: p.mean_degree,
            ratio: p.ratio,
            epsilon: p.epsilon,
            max_iter,
            fp_tol: p.fp_tol,
        };
        match model::predict_converged(&params) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(TcModel { sol }));
                TcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Root aggregate `a_0`, or NaN for a null handle.
///
/// # Safety
/// `m` must be null or a live handle from `tc_model_predict`.
#[no_mangle]
pub unsafe extern "C" fn tc_model_a0(m: *const TcModel) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.sol.a0)
}

/// Mass not assigned to any finite level (may be slightly negative).
///
/// # Safety
/// `m` must be null or a live handle from `tc_model_predict`.
#[no_mangle]
pub unsafe extern "C" fn tc_model_residual(m: *const TcModel) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.sol.profile.residual)
}

/// Number of levels `0..=x_max`, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle from `tc_model_predict`.
#[no_mangle]
pub unsafe extern "C" fn tc_model_num_levels(m: *const TcModel) -> usize {
    m.as_ref().map_or(0, |m| m.sol.ax.len())
}

/// # Safety
/// `m` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tc_model_level(
    m: *const TcModel,
    x: usize,
    out: *mut TcModelLevel,
) -> TcStatus {
    let (Some(m), Some(out)) = (m.as_ref(), out.as_mut()) else {
        return fail(TcStatus::NullPointer, "null argument");
    };
    let p = &m.sol.profile;
    if x >= m.sol.ax.len() {
        return fail(TcStatus::OutOfRange, &format!("level {x} out of range"));
    }
    *out = TcModelLevel {
        pmin: p.pmin[x],
        nx: p.nx[x],
        nxus: p.nxus[x],
        ax: m.sol.ax[x],
    };
    TcStatus::Ok
}

/// # Safety
/// `m` must be null or a handle from `tc_model_predict` not already freed.
#[no_mangle]
pub unsafe extern "C" fn tc_model_free(m: *mut TcModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Simulation defaults: failure rate 1, seed 0, warmup 50, interval 1,
/// 1000 samples, level cap derived from the model.
#[no_mangle]
pub extern "C" fn tc_sim_config_default(nodes: u64, mean_degree: f64, ratio: f64) -> TcSimConfig {
    let c = SimConfig::new(nodes as usize, mean_degree, ratio);
    TcSimConfig {
        nodes,
        mean_degree: c.mean_degree,
        ratio: c.ratio,
        fail_rate: c.fail_rate,
        seed: c.seed,
        warmup_time: c.warmup_time,
        sample_interval: c.sample_interval,
        num_samples: c.num_samples as u64,
        max_level: c.max_level as u64,
    }
}

/// Runs a simulation to completion on the calling thread.
///
/// # Safety
/// `cfg` must be null or point to a valid `TcSimConfig`; `out` must be null or
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_simulate(
    cfg: *const TcSimConfig,
    out: *mut *mut TcSimulation,
) -> TcStatus {
    if cfg.is_null() || out.is_null() {
        return fail(TcStatus::NullPointer, "null argument");
    }
    *out = ptr::null_mut();
    let c = *cfg;
    guard(move || {
        let conv = || -> Result<SimConfig, TcStatus> {
            Ok(SimConfig {
                nodes: usize_of(c.nodes, "nodes")?,
                mean_degree: c.mean_degree,
                ratio: c.ratio,
                fail_rate: c.fail_rate,
                seed: c.seed,
                warmup_time: c.warmup_time,
                sample_interval: c.sample_interval,
                num_samples: usize_of(c.num_samples, "num_samples")?,
                max_level: usize_of(c.max_level, "max_level")?,
            })
        };
        let cfg = match conv() {
            Ok(v) => v,
            Err(s) => return s,
        };
        match sim::run(&cfg) {
            Ok(res) => {
                *out = Box::into_raw(Box::new(TcSimulation { res }));
                TcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Mean `A_0 / N`; writes its standard error to `se` when non-null.
///
/// # Safety
/// `s` must be null or a live handle; `se` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tc_sim_a0(s: *const TcSimulation, se: *mut f64) -> f64 {
    let Some(s) = s.as_ref() else { return f64::NAN };
    let (mean, err) = s.res.summary.a0();
    if let Some(se) = se.as_mut() {
        *se = err;
    }
    mean
}

/// Mean sampled network size.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_sim_mean_size(s: *const TcSimulation) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.res.summary.mean_size)
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_sim_num_levels(s: *const TcSimulation) -> usize {
    s.as_ref().map_or(0, |s| s.res.summary.levels.len())
}

/// # Safety
/// `s` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tc_sim_level(
    s: *const TcSimulation,
    x: usize,
    out: *mut TcSimLevel,
) -> TcStatus {
    let (Some(s), Some(out)) = (s.as_ref(), out.as_mut()) else {
        return fail(TcStatus::NullPointer, "null argument");
    };
    let Some(l) = s.res.summary.levels.get(x) else {
        return fail(TcStatus::OutOfRange, &format!("level {x} out of range"));
    };
    *out = TcSimLevel {
        nx_mean: l.nx_mean,
        nx_se: l.nx_se,
        axn_mean: l.axn_mean,
        axn_se: l.axn_se,
        nxus_frac_mean: l.nxus_frac_mean,
        nxus_frac_se: l.nxus_frac_se,
    };
    TcStatus::Ok
}

/// # Safety
/// `s` must be null or a handle from `tc_simulate` not already freed.
#[no_mangle]
pub unsafe extern "C" fn tc_sim_free(s: *mut TcSimulation) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Message for the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tc_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => c"",
        };
    VERSION.as_ptr()
}
