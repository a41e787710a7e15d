//! C interface to geofluid.
//!
//! Handles are opaque and owned by the caller once returned; release them with the matching
//! `*_free`. Every entry point returns a [`GfStatus`] and never unwinds across the boundary.
//! On failure the message is kept per thread and read back with [`gf_last_error_message`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use geofluid::error::Error;
use geofluid::fluid::{Eos, EosConfig};
use geofluid::manifold::{christoffel, ChartMetric};
use geofluid::scenario::{Command, RunOptions, Scenario};

/// Bumped whenever a signature or layout in this header changes.
pub const GF_ABI_VERSION: u32 = 1;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Geometry = 4,
    Numeric = 5,
    Classification = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque coordinate chart with its metric.
pub struct GfChart {
    inner: ChartMetric,
}

/// Opaque equation of state.
pub struct GfEos {
    inner: Eos,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GfStatus {
    match e {
        Error::Config { .. } => GfStatus::Config,
        Error::Classification(_) => GfStatus::Classification,
        Error::Io(_) => GfStatus::Io,
        Error::NotPositiveDefinite { .. }
        | Error::NotSymmetric { .. }
        | Error::ChartSingular { .. }
        | Error::OutsideDomain { .. }
        | Error::Dimension { .. }
        | Error::Geometry(_)
        | Error::MarkerLost { .. } => GfStatus::Geometry,
        _ => GfStatus::Numeric,
    }
}

struct Fail(GfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any error message and converts panics to `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GfStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            GfStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GfStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(GfStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn chart_ref<'a>(p: *const GfChart) -> Result<&'a ChartMetric, Fail> {
    p.as_ref().map(|c| &c.inner).ok_or_else(|| null("chart"))
}

fn check_dim(chart: &ChartMetric, len: usize) -> Result<(), Fail> {
    if len != chart.dim {
        return Err(Error::Dimension { expected: chart.dim, got: len }.into());
    }
    Ok(())
}

/// ABI version of this library; compare with `GF_ABI_VERSION` from the header.
#[no_mangle]
pub extern "C" fn gf_abi_version() -> u32 {
    GF_ABI_VERSION
}

/// Message of the last failed call on this thread; empty after a success. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn gf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Built-in chart by name (`flat_torus`, `torus_of_revolution`, `unit_sphere`, `flat_patch`
/// or their short names M1..M4) in dimension `dim`, default parameters.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_chart_builtin(name: *const c_char, dim: usize, out: *mut *mut GfChart) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = read_str(name, "name")?;
        let inner = ChartMetric::builtin(name, dim, &BTreeMap::new())?;
        *out = Box::into_raw(Box::new(GfChart { inner }));
        Ok(())
    })
}

/// # Safety
/// `chart` must come from `gf_chart_builtin` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gf_chart_free(chart: *mut GfChart) {
    if !chart.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(chart))));
    }
}

/// Chart dimension, or 0 for a null handle.
///
/// # Safety
/// `chart` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_chart_dim(chart: *const GfChart) -> usize {
    chart.as_ref().map_or(0, |c| c.inner.dim)
}

/// Christoffel symbols Γ^i_{jk} at `x` (length n), written to `out` at index (i·n + j)·n + k.
/// `out_len` must be at least n³.
///
/// # Safety
/// `x` must hold `x_len` doubles and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_christoffel(
    chart: *const GfChart,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> GfStatus {
    guard(|| {
        let chart = chart_ref(chart)?;
        let x = read_slice(x, x_len, "x")?;
        check_dim(chart, x_len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = chart.dim;
        if out_len < n * n * n {
            return Err(Fail(GfStatus::BufferTooSmall, format!("need {} doubles, got {out_len}", n * n * n)));
        }
        let gamma = christoffel(chart, x)?;
        std::slice::from_raw_parts_mut(out, n * n * n).copy_from_slice(&gamma.data);
        Ok(())
    })
}

/// Scalar curvature at `x`.
///
/// # Safety
/// `x` must hold `x_len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_scalar_curvature(chart: *const GfChart, x: *const f64, x_len: usize, out: *mut f64) -> GfStatus {
    guard(|| {
        let chart = chart_ref(chart)?;
        let x = read_slice(x, x_len, "x")?;
        check_dim(chart, x_len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = chart.geometry(x)?.scalar_curvature();
        Ok(())
    })
}

/// Equation of state from a TOML table such as `variant = "polytropic"` plus its fields.
/// `dim` fixes the default polytropic exponent.
///
/// # Safety
/// `toml_text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_eos_from_toml(toml_text: *const c_char, dim: usize, out: *mut *mut GfEos) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(toml_text, "toml_text")?;
        let cfg: EosConfig = toml::from_str(text).map_err(|e| Fail(GfStatus::Config, format!("eos: {}", e.message())))?;
        let inner = cfg.build(dim)?;
        *out = Box::into_raw(Box::new(GfEos { inner }));
        Ok(())
    })
}

/// # Safety
/// `eos` must come from `gf_eos_from_toml` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gf_eos_free(eos: *mut GfEos) {
    if !eos.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(eos))));
    }
}

/// Pressure and its first partials: `out[0] = P`, `out[1] = ∂P/∂ρ`, `out[2] = ∂P/∂S`.
///
/// # Safety
/// `out` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_eos_pressure(eos: *const GfEos, rho: f64, s: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        let eos = eos.as_ref().map(|e| &e.inner).ok_or_else(|| null("eos"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (p, pr, ps) = eos.pressure(rho, s)?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&[p, pr, ps]);
        Ok(())
    })
}

/// Runs a subcommand (`simulate`, `verify-densities`, ...) on a scenario file path or bundled
/// name, writing artifacts under `out_dir`. On success `*summary_json` receives the summary
/// (free with `gf_string_free`) and `*exit_code` the CLI exit code for the outcome.
///
/// # Safety
/// String arguments must be NUL-terminated; `summary_json` and `exit_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_run_scenario(
    scenario: *const c_char,
    command: *const c_char,
    out_dir: *const c_char,
    allow_incompatible: bool,
    summary_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> GfStatus {
    guard(|| {
        if summary_json.is_null() {
            return Err(null("summary_json"));
        }
        if exit_code.is_null() {
            return Err(null("exit_code"));
        }
        let scenario = read_str(scenario, "scenario")?;
        let command = read_str(command, "command")?;
        let out_dir = read_str(out_dir, "out_dir")?;
        let cmd = Command::from_name(command)
            .ok_or_else(|| Fail(GfStatus::Config, format!("unknown command `{command}`")))?;
        let opts = RunOptions { out_dir: PathBuf::from(out_dir), seed: None, allow_incompatible };
        let report = cmd.run(&Scenario::load(scenario)?.build()?, &opts)?;
        let json = serde_json::to_string(&report).map_err(|e| Fail(GfStatus::Numeric, e.to_string()))?;
        *exit_code = report.outcome.exit_code();
        *summary_json = CString::new(json).map_err(|e| Fail(GfStatus::Numeric, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
