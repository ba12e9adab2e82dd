//! C ABI for coalition-nash.
//!
//! Every fallible call returns a [`CnStatus`]; on failure a description is
//! available from [`cn_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use coalition_nash::engine::{certify, run, Algorithm, RunOptions, Trajectory};
use coalition_nash::game::{solve_ne, Game};
use coalition_nash::harness::{builtin_scenario, load_scenario, run_scenario, Overrides, Scenario, ORACLE_TOL};
use coalition_nash::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    Topology = 6,
    Numerical = 7,
    Diverged = 8,
    InvalidArgument = 9,
    BufferTooSmall = 10,
    NotFound = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnAlgorithm {
    Special = 0,
    General = 1,
}

impl From<CnAlgorithm> for Algorithm {
    fn from(a: CnAlgorithm) -> Self {
        match a {
            CnAlgorithm::Special => Algorithm::Special,
            CnAlgorithm::General => Algorithm::General,
        }
    }
}

impl From<Algorithm> for CnAlgorithm {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Special => CnAlgorithm::Special,
            Algorithm::General => CnAlgorithm::General,
        }
    }
}

/// Parsed, validated scenario.
pub struct CnScenario(Scenario);

/// Game built from a scenario.
pub struct CnGame(Game);

/// Completed run with its logged records.
pub struct CnTrajectory(Trajectory);

/// Iteration controls; `stop_tol` of zero or infinity runs the full budget.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnRunOptions {
    pub max_iters: usize,
    pub stop_tol: f64,
    pub log_stride: usize,
    /// Track the Lyapunov descent; needs a certificate for the game.
    pub monitor_descent: bool,
}

/// Step-size certificate; `gamma*` fields are NaN when the scheme has none.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnCertificate {
    pub algorithm: CnAlgorithm,
    pub bound: f64,
    pub rate: f64,
    pub mu: f64,
    pub gamma: f64,
    pub gamma_psi: f64,
    pub gamma_xi: f64,
}

/// Scalar part of one logged record; optional values are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnRecord {
    pub k: usize,
    pub constraint_residual: f64,
    pub e_xi_norm: f64,
    pub e_psi_norm: f64,
    pub tracking_residual: f64,
    pub lyapunov: f64,
    pub dist_to_ne: f64,
    pub kkt_residual: f64,
}

/// Whole-run figures.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnRunSummary {
    pub algorithm: CnAlgorithm,
    pub step: f64,
    pub iterations: usize,
    pub records: usize,
    pub stopped_early: bool,
    pub max_constraint_residual: f64,
    /// NaN for the estimation-only scheme.
    pub max_tracking_residual: f64,
    /// Descent violations; -1 when descent was not monitored.
    pub descent_violations: i64,
}

struct Failure {
    status: CnStatus,
    message: String,
}

impl Failure {
    fn new(status: CnStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => CnStatus::Parse,
            Error::Validation(_) => CnStatus::Validation,
            Error::Io(_) => CnStatus::Io,
            Error::DisconnectedGraph(_) | Error::InvalidEdge(_) | Error::DegenerateTopology(_) => CnStatus::Topology,
            Error::Diverged { .. } | Error::NoConvergence { .. } => CnStatus::Diverged,
            Error::InvalidArgument(_) | Error::IndexOutOfRange { .. } => CnStatus::InvalidArgument,
            _ => CnStatus::Numerical,
        };
        Self::new(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CnStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {what}"));
            CnStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Failure::new(CnStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn out_slot<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| Failure::new(CnStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::new(CnStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(CnStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write_slice(src: &[f64], out: *mut f64, len: usize, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::new(CnStatus::NullPointer, format!("{what} is NULL")));
    }
    if len < src.len() {
        return Err(Failure::new(
            CnStatus::BufferTooSmall,
            format!("{what} holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, expected: usize, what: &str) -> FfiResult<&'a [f64]> {
    if p.is_null() {
        return Err(Failure::new(CnStatus::NullPointer, format!("{what} is NULL")));
    }
    if len != expected {
        return Err(Failure::new(
            CnStatus::InvalidArgument,
            format!("{what} has {len} values, expected {expected}"),
        ));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses scenario JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_from_json(json: *const c_char, out: *mut *mut CnScenario) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let s = Scenario::from_json(read_str(json, "json")?)?;
        *slot = boxed(CnScenario(s));
        Ok(())
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_from_file(path: *const c_char, out: *mut *mut CnScenario) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let s = load_scenario(Path::new(read_str(path, "path")?))?;
        *slot = boxed(CnScenario(s));
        Ok(())
    })
}

/// Loads an embedded scenario (`"case1"` or `"case2"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_builtin(name: *const c_char, out: *mut *mut CnScenario) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let name = read_str(name, "name")?;
        let text = builtin_scenario(name)
            .ok_or_else(|| Failure::new(CnStatus::NotFound, format!("no built-in scenario `{name}`")))?;
        *slot = boxed(CnScenario(Scenario::from_json(text)?));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_free(scenario: *mut CnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Serializes the scenario; free the result with [`cn_string_free`].
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_to_json(scenario: *const CnScenario, out: *mut *mut c_char) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let s = borrow(scenario, "scenario")?;
        let text = CString::new(s.0.to_json()).map_err(|_| Failure::new(CnStatus::Parse, "interior NUL"))?;
        *slot = text.into_raw();
        Ok(())
    })
}

/// Builds the game described by the scenario.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_build_game(scenario: *const CnScenario, out: *mut *mut CnGame) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let game = borrow(scenario, "scenario")?.0.build_game()?;
        *slot = boxed(CnGame(game));
        Ok(())
    })
}

/// Runs the scenario as configured and writes `trajectory.csv` and `report.json` into `out_dir`.
///
/// # Safety
/// `scenario` must be a live handle, `out_dir` a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_run(
    scenario: *const CnScenario,
    out_dir: *const c_char,
    out: *mut *mut CnTrajectory,
) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let s = borrow(scenario, "scenario")?;
        let dir = read_str(out_dir, "out_dir")?;
        let outcome = run_scenario(&s.0, Path::new(dir), &Overrides::default())?;
        *slot = boxed(CnTrajectory(outcome.trajectory));
        Ok(())
    })
}

/// # Safety
/// `game` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cn_game_free(game: *mut CnGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Total number of agents, or 0 for NULL.
///
/// # Safety
/// `game` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cn_game_agent_count(game: *const CnGame) -> usize {
    game.as_ref().map_or(0, |g| g.0.n_sum())
}

/// Number of coalitions, or 0 for NULL.
///
/// # Safety
/// `game` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cn_game_coalition_count(game: *const CnGame) -> usize {
    game.as_ref().map_or(0, |g| g.0.topology().num_coalitions())
}

/// Solves for the equilibrium; writes it to `x_out` and, if non-NULL, the KKT residual.
///
/// # Safety
/// `game` must be a live handle and `x_out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cn_game_solve_ne(
    game: *const CnGame,
    x_out: *mut f64,
    len: usize,
    kkt_residual: *mut f64,
) -> CnStatus {
    guard(|| {
        let g = borrow(game, "game")?;
        let ne = solve_ne(&g.0, ORACLE_TOL)?;
        write_slice(&ne.x_star, x_out, len, "x_out")?;
        if let Some(r) = kkt_residual.as_mut() {
            *r = ne.kkt_residual;
        }
        Ok(())
    })
}

/// Coalition objective values at `x`.
///
/// # Safety
/// `x` must hold `len` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cn_game_coalition_values(
    game: *const CnGame,
    x: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> CnStatus {
    guard(|| {
        let g = borrow(game, "game")?;
        let x = read_slice(x, len, g.0.n_sum(), "x")?;
        write_slice(&g.0.coalition_values(x), out, out_len, "out")
    })
}

/// Stationarity residual of the equilibrium conditions at `x`.
///
/// # Safety
/// `x` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cn_game_kkt_residual(game: *const CnGame, x: *const f64, len: usize, out: *mut f64) -> CnStatus {
    guard(|| {
        let g = borrow(game, "game")?;
        let x = read_slice(x, len, g.0.n_sum(), "x")?;
        *out_slot(out, "out")? = g.0.kkt_residual(x)?;
        Ok(())
    })
}

/// Step-size certificate of `algorithm` on `game`.
///
/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cn_game_certify(game: *const CnGame, algorithm: CnAlgorithm, out: *mut CnCertificate) -> CnStatus {
    guard(|| {
        let g = borrow(game, "game")?;
        let slot = out_slot(out, "out")?;
        let c = certify(&g.0, algorithm.into())?;
        *slot = CnCertificate {
            algorithm: c.mode.into(),
            bound: c.bound,
            rate: c.rate,
            mu: c.constants.mu,
            gamma: opt(c.gamma),
            gamma_psi: opt(c.gamma_psi),
            gamma_xi: opt(c.gamma_xi),
        };
        Ok(())
    })
}

/// Defaults: 20000 iterations, no early stop, every iterate logged.
#[no_mangle]
pub extern "C" fn cn_run_options_default() -> CnRunOptions {
    let d = RunOptions::default();
    CnRunOptions {
        max_iters: d.max_iters,
        stop_tol: d.stop_tol,
        log_stride: d.log_stride,
        monitor_descent: d.monitor_descent,
    }
}

/// Runs `algorithm` with `step` from the game's initial point.
///
/// `options` may be NULL for the defaults. Records carry the distance to the
/// equilibrium, and Lyapunov values whenever a certificate exists.
///
/// # Safety
/// `game` must be a live handle, `options` NULL or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cn_game_run(
    game: *const CnGame,
    algorithm: CnAlgorithm,
    step: f64,
    options: *const CnRunOptions,
    out: *mut *mut CnTrajectory,
) -> CnStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = ptr::null_mut();
        let g = &borrow(game, "game")?.0;
        let o = options.as_ref().copied().unwrap_or_else(|| cn_run_options_default());
        let algorithm: Algorithm = algorithm.into();
        let certificate = certify(g, algorithm).ok();
        let opts = RunOptions {
            max_iters: o.max_iters,
            stop_tol: o.stop_tol,
            log_stride: o.log_stride,
            oracle_ne: Some(solve_ne(g, ORACLE_TOL)?.x_star),
            monitor_descent: o.monitor_descent,
        };
        let traj = run(g, algorithm, step, &opts, certificate.as_ref())?;
        *slot = boxed(CnTrajectory(traj));
        Ok(())
    })
}

/// # Safety
/// `trajectory` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cn_trajectory_free(trajectory: *mut CnTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// # Safety
/// `trajectory` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cn_trajectory_summary(trajectory: *const CnTrajectory, out: *mut CnRunSummary) -> CnStatus {
    guard(|| {
        let t = &borrow(trajectory, "trajectory")?.0;
        *out_slot(out, "out")? = CnRunSummary {
            algorithm: t.algorithm.into(),
            step: t.step,
            iterations: t.iterations,
            records: t.records.len(),
            stopped_early: t.stopped_early,
            max_constraint_residual: t.max_constraint_residual,
            max_tracking_residual: opt(t.max_tracking_residual),
            descent_violations: t.descent.as_ref().map_or(-1, |d| d.violations as i64),
        };
        Ok(())
    })
}

/// Final decision vector.
///
/// # Safety
/// `trajectory` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cn_trajectory_final_x(trajectory: *const CnTrajectory, out: *mut f64, len: usize) -> CnStatus {
    guard(|| write_slice(borrow(trajectory, "trajectory")?.0.final_x(), out, len, "out"))
}

fn record_at(t: &CnTrajectory, index: usize) -> FfiResult<&coalition_nash::engine::DiagnosticsRecord> {
    t.0.records.get(index).ok_or_else(|| {
        Failure::new(
            CnStatus::InvalidArgument,
            format!("record {index} out of range ({} records)", t.0.records.len()),
        )
    })
}

/// Scalar fields of record `index`.
///
/// # Safety
/// `trajectory` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cn_trajectory_record(trajectory: *const CnTrajectory, index: usize, out: *mut CnRecord) -> CnStatus {
    guard(|| {
        let r = record_at(borrow(trajectory, "trajectory")?, index)?;
        *out_slot(out, "out")? = CnRecord {
            k: r.k,
            constraint_residual: r.constraint_residual,
            e_xi_norm: r.e_xi_norm,
            e_psi_norm: opt(r.e_psi_norm),
            tracking_residual: opt(r.tracking_residual),
            lyapunov: opt(r.lyapunov.map(|l| l.total)),
            dist_to_ne: opt(r.dist_to_ne),
            kkt_residual: r.kkt_residual,
        };
        Ok(())
    })
}

/// Decision vector of record `index`.
///
/// # Safety
/// `trajectory` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cn_trajectory_record_x(
    trajectory: *const CnTrajectory,
    index: usize,
    out: *mut f64,
    len: usize,
) -> CnStatus {
    guard(|| {
        let r = record_at(borrow(trajectory, "trajectory")?, index)?;
        write_slice(&r.x, out, len, "out")
    })
}
