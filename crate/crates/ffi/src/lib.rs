//! C ABI for the turnstile readout simulator.
//!
//! Every fallible function returns a [`TsStatus`]; on failure a message for
//! the calling thread is available from [`ts_last_error_message`]. Handles
//! are opaque and must be released with their matching `*_free` function.
//! Strings returned by the library are released with [`ts_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use turnstile::cli::{self, CliError, OutputFormat, RunConfig};
use turnstile::cycle::{detection_probability, run_cycle};
use turnstile::experiment::sample_cycles;
use turnstile::model::{gamma_rate, TunnelParams};
use turnstile::spin_algebra::BlochVector;
use turnstile::tomography::{build_design, reconstruct, TomographyDesign};

/// Result code of every fallible call. Values 1 to 4 match the command-line
/// exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    Internal = 1,
    Parse = 2,
    Validation = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Parsed and validated run configuration.
pub struct TsConfig {
    config: RunConfig,
    digest: String,
}

/// Tomography design matrix with its decomposition.
pub struct TsDesign {
    design: TomographyDesign,
}

/// Summary of one measurement cycle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TsCycleSummary {
    /// Ancilla Bloch vector after the interaction.
    pub u_a: [f64; 3],
    /// Pulse probability, clamped to `[0, 1]`.
    pub pr_pulse: f64,
    /// Unclamped `C τ₁ |T|² (1 + u_R·u_A)`.
    pub pr_raw: f64,
    /// True when `2 C τ₁ |T|² > 1`.
    pub saturated: bool,
    pub kappa: f64,
    /// Max-abs deviation of `E_pulse + E_none` from the identity.
    pub completeness_error: f64,
    /// True when the time-scale hierarchy holds.
    pub hierarchy_satisfied: bool,
}

/// Pulse counts from repeated cycles.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TsShotRecord {
    pub n_cycles: u64,
    pub n_pulses: u64,
    pub pr_hat: f64,
    pub std_err: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TsStatus, msg: &str) -> TsStatus {
    set_last_error(msg);
    status
}

fn from_cli(e: CliError) -> TsStatus {
    let status = match e {
        CliError::Parse(_) => TsStatus::Parse,
        CliError::Validation { .. } => TsStatus::Validation,
        CliError::Io(_) => TsStatus::Io,
        CliError::Internal(_) => TsStatus::Internal,
    };
    fail(status, &e.to_string())
}

fn from_core(e: turnstile::Error) -> TsStatus {
    fail(TsStatus::Validation, &e.to_string())
}

fn guard(f: impl FnOnce() -> TsStatus) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == TsStatus::Ok {
                set_last_error("");
            }
            status
        }
        Err(_) => fail(TsStatus::Panic, "panic inside turnstile"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(TsStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ts_config_default(out: *mut *mut TsConfig) -> TsStatus {
    guard(|| {
        non_null!(out);
        let cfg = TsConfig {
            config: RunConfig::default(),
            digest: cli::config_digest(b"{}"),
        };
        *out = Box::into_raw(Box::new(cfg));
        TsStatus::Ok
    })
}

/// Parse and validate a JSON configuration document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_config_from_json(
    json: *const c_char,
    out: *mut *mut TsConfig,
) -> TsStatus {
    guard(|| {
        non_null!(json, out);
        let bytes = CStr::from_ptr(json).to_bytes();
        match cli::parse_config(bytes) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(TsConfig {
                    config: p.config,
                    digest: p.digest,
                }));
                TsStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Override the master seed.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_config_set_seed(cfg: *mut TsConfig, seed: u64) -> TsStatus {
    guard(|| {
        non_null!(cfg);
        (*cfg).config.experiment.seed = seed;
        TsStatus::Ok
    })
}

/// Release a configuration handle. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_config_free(cfg: *mut TsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run a command (`rates`, `cycle`, `sweep`, `calibrate`, `tomography`) and
/// return its table encoded as `csv` or `jsonl`. Output is byte-identical to
/// the command-line tool for the same configuration.
///
/// # Safety
/// `cfg` must be a live handle, `command` and `format` NUL-terminated
/// strings, and `out` a valid pointer. Free the result with
/// [`ts_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ts_execute(
    cfg: *const TsConfig,
    command: *const c_char,
    format: *const c_char,
    out: *mut *mut c_char,
) -> TsStatus {
    guard(|| {
        non_null!(cfg, command, format, out);
        let cfg = &*cfg;
        let Ok(command) = CStr::from_ptr(command).to_str() else {
            return fail(TsStatus::Validation, "command is not UTF-8");
        };
        let command = match command.parse::<cli::Command>() {
            Ok(c) => c,
            Err(e) => return from_cli(e),
        };
        let format = match CStr::from_ptr(format).to_bytes() {
            b"csv" => OutputFormat::Csv,
            b"jsonl" => OutputFormat::Jsonl,
            _ => return fail(TsStatus::Validation, "format must be \"csv\" or \"jsonl\""),
        };
        match cli::execute(command, &cfg.config, &cfg.digest) {
            Ok(exec) => {
                let bytes = cli::render(&exec.table, format);
                match CString::new(bytes) {
                    Ok(s) => {
                        *out = s.into_raw();
                        TsStatus::Ok
                    }
                    Err(_) => fail(TsStatus::Internal, "output contains a NUL byte"),
                }
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Release a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Lorentzian tunneling rate `|T_Lc|² γ₀² / (Δ² + γ₀²)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_gamma_rate(
    delta: f64,
    gamma0: f64,
    t_lc_sq: f64,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        non_null!(out);
        let tp = TunnelParams {
            gamma0,
            t_lc_sq,
            delta,
        };
        if let Err(e) = tp.validate() {
            return from_core(e);
        }
        *out = gamma_rate(delta, &tp);
        TsStatus::Ok
    })
}

unsafe fn read_bloch(p: *const f64) -> Result<BlochVector, TsStatus> {
    let v = [*p, *p.add(1), *p.add(2)];
    BlochVector::new(v).map_err(from_core)
}

/// Clamped pulse probability `C τ₁ t_sq (1 + u_R·u_A)`.
///
/// # Safety
/// `u_a` and `u_r` must point to three doubles each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ts_detection_probability(
    u_a: *const f64,
    u_r: *const f64,
    c: f64,
    tau1: f64,
    t_sq: f64,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        non_null!(u_a, u_r, out);
        let (u_a, u_r) = match (read_bloch(u_a), read_bloch(u_r)) {
            (Ok(a), Ok(r)) => (a, r),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        *out = detection_probability(&u_a, &u_r, c, tau1, t_sq).value;
        TsStatus::Ok
    })
}

/// Run one measurement cycle with the configured model, leads and gate state.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_cycle_run(cfg: *const TsConfig, out: *mut TsCycleSummary) -> TsStatus {
    guard(|| {
        non_null!(cfg, out);
        let c = &(*cfg).config;
        let rho_s = match c.gate_density() {
            Ok(r) => r,
            Err(e) => return from_cli(e),
        };
        match run_cycle(
            &c.model,
            &c.tunnel,
            &c.schedule,
            &c.leads,
            &rho_s,
            c.detection.c,
            c.detection.hierarchy_threshold,
        ) {
            Ok(o) => {
                *out = TsCycleSummary {
                    u_a: o.u_a.components(),
                    pr_pulse: o.pr_pulse,
                    pr_raw: o.detection.raw,
                    saturated: o.detection.saturated,
                    kappa: o.instrument.kappa,
                    completeness_error: o.instrument.completeness_error(),
                    hierarchy_satisfied: o.hierarchy.satisfied,
                };
                TsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Draw the pulse count of `n` independent cycles with probability `pr`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_sample_cycles(
    pr: f64,
    n: u64,
    seed: u64,
    out: *mut TsShotRecord,
) -> TsStatus {
    guard(|| {
        non_null!(out);
        match sample_cycles(pr, n, seed) {
            Ok(r) => {
                *out = TsShotRecord {
                    n_cycles: r.n_cycles,
                    n_pulses: r.n_pulses,
                    pr_hat: r.pr_hat,
                    std_err: r.std_err,
                };
                TsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Build the tomography design for the configured settings, or the default
/// grid when none are configured.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_design_build(
    cfg: *const TsConfig,
    out: *mut *mut TsDesign,
) -> TsStatus {
    guard(|| {
        non_null!(cfg, out);
        let c = &(*cfg).config;
        if let Err(e) = c.validate() {
            return from_cli(e);
        }
        let settings = if c.tomography.settings.is_empty() {
            cli::default_tomography_grid(
                c.leads.u_l.norm(),
                c.leads.u_r.norm(),
                c.schedule.t_interact,
            )
        } else {
            c.tomography.settings.clone()
        };
        match build_design(
            &settings,
            &c.model,
            &c.detector(),
            c.schedule.include_gate_hamiltonian,
            c.tomography.mode,
        ) {
            Ok(design) => {
                *out = Box::into_raw(Box::new(TsDesign { design }));
                TsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Numerical rank of the design matrix.
///
/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_design_rank(design: *const TsDesign, out: *mut usize) -> TsStatus {
    guard(|| {
        non_null!(design, out);
        *out = (*design).design.rank;
        TsStatus::Ok
    })
}

/// Number of measurement settings (rows).
///
/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_design_n_settings(
    design: *const TsDesign,
    out: *mut usize,
) -> TsStatus {
    guard(|| {
        non_null!(design, out);
        *out = (*design).design.settings.len();
        TsStatus::Ok
    })
}

/// Number of state parameters (3 or 15).
///
/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_design_n_params(design: *const TsDesign, out: *mut usize) -> TsStatus {
    guard(|| {
        non_null!(design, out);
        *out = (*design).design.n_params();
        TsStatus::Ok
    })
}

/// Ratio of largest to smallest retained singular value; infinity when the
/// rank is zero.
///
/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_design_condition_number(
    design: *const TsDesign,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        non_null!(design, out);
        *out = (*design).design.condition_number.unwrap_or(f64::INFINITY);
        TsStatus::Ok
    })
}

/// Minimum-norm least-squares reconstruction from measured pulse
/// probabilities. `n_pr` must equal the number of settings and `n_theta` the
/// number of parameters.
///
/// # Safety
/// `pr` must point to `n_pr` doubles and `theta_out` to `n_theta` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_design_reconstruct(
    design: *const TsDesign,
    pr: *const f64,
    n_pr: usize,
    theta_out: *mut f64,
    n_theta: usize,
) -> TsStatus {
    guard(|| {
        non_null!(design, pr, theta_out);
        let d = &(*design).design;
        if n_theta != d.n_params() {
            return fail(
                TsStatus::Validation,
                &format!(
                    "theta buffer holds {n_theta} values, design has {} parameters",
                    d.n_params()
                ),
            );
        }
        let pr = std::slice::from_raw_parts(pr, n_pr);
        match reconstruct(d, pr, None) {
            Ok(r) => {
                ptr::copy_nonoverlapping(r.theta_hat.values.as_ptr(), theta_out, n_theta);
                TsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Release a design handle. Null is ignored.
///
/// # Safety
/// `design` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_design_free(design: *mut TsDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}
