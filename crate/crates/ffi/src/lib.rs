//! C ABI over the nvgate simulator.
//!
//! Every entry point returns an [`NvgStatus`]; on failure the message is
//! available from [`nvg_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nvgate::cli::{emit, execute, parse_config, parse_str, Experiment, Format, Outcome, RunConfig};
use nvgate::effective::{effective_nuclear_model, quasi_steady_polarization};
use nvgate::experiments::{analytic_population, AnalyticVariant};
use nvgate::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvgStatus {
    Ok = 0,
    InvalidArgument = 1,
    Config = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Output encoding codes for `nvg_result_write`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvgFormat {
    Csv = 0,
    Jsonl = 1,
}

/// Closed-form sensor population variant codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvgAnalyticVariant {
    Secular = 0,
    FullCoupling = 1,
}

/// Scalars of the effective nuclear model; rates in rad/s or 1/s.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NvgEffectiveScalars {
    pub g_e: f64,
    pub g_e_prime: f64,
    pub p: f64,
    pub gamma_r: f64,
    pub gamma_n: f64,
    pub validity_ratio: f64,
    pub transfer_time: f64,
}

/// Validated run configuration.
pub struct NvgConfig {
    inner: RunConfig,
}

/// Outcome of a run: a sweep (axis plus series) or a scalar table.
pub struct NvgResult {
    outcome: Outcome,
    /// Column names (sweeps) or `quantity [unit]` labels (tables).
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NvgStatus {
    match e {
        Error::Config { .. } => NvgStatus::Config,
        Error::InvalidArgument(_) | Error::Dimension(_) => NvgStatus::InvalidArgument,
        Error::Numerical(_) | Error::Linalg(_) => NvgStatus::Numerical,
        Error::Io { .. } => NvgStatus::Io,
    }
}

fn fail(status: NvgStatus, msg: &str) -> NvgStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), NvgStatus>) -> NvgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NvgStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(NvgStatus::Panic, &format!("internal panic: {msg}"))
        }
    }
}

fn lift<T>(r: nvgate::Result<T>) -> Result<T, NvgStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn invalid(msg: &str) -> NvgStatus {
    fail(NvgStatus::InvalidArgument, msg)
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, NvgStatus> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn experiment(p: *const c_char) -> Result<Option<Experiment>, NvgStatus> {
    if p.is_null() {
        return Ok(None);
    }
    let name = text(p, "experiment")?;
    Experiment::from_name(name)
        .map(Some)
        .ok_or_else(|| invalid(&format!("unknown experiment `{name}`")))
}

fn out_ptr<T>(out: *mut T) -> Result<(), NvgStatus> {
    if out.is_null() {
        Err(invalid("output pointer is null"))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn nvg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn nvg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a TOML config file. `experiment_name` may be null to use
/// the file's own `experiment` key. Names are kebab-case, e.g. `sweep-rf`.
///
/// # Safety
/// `path` and `experiment_name` are null or NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_config_from_file(
    path: *const c_char,
    experiment_name: *const c_char,
    out: *mut *mut NvgConfig,
) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        let path = text(path, "path")?;
        let cfg = lift(parse_config(Path::new(path), experiment(experiment_name)?))?;
        *out = Box::into_raw(Box::new(NvgConfig { inner: cfg }));
        Ok(())
    })
}

/// Parses and validates TOML config text.
///
/// # Safety
/// `toml` and `experiment_name` are null or NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_config_from_str(
    toml: *const c_char,
    experiment_name: *const c_char,
    out: *mut *mut NvgConfig,
) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        let cfg = lift(parse_str(text(toml, "toml")?, experiment(experiment_name)?))?;
        *out = Box::into_raw(Box::new(NvgConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `cfg` is null or came from `nvg_config_from_*` and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvg_config_free(cfg: *mut NvgConfig) {
    if !cfg.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(cfg))));
    }
}

/// Effective-model scalars of the configured register.
///
/// # Safety
/// `cfg` is a live config handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_effective_scalars(cfg: *const NvgConfig, out: *mut NvgEffectiveScalars) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        let cfg = cfg.as_ref().ok_or_else(|| invalid("config handle is null"))?;
        let spec = &cfg.inner.spec;
        let m = lift(effective_nuclear_model(
            &spec.register,
            &spec.dissipation,
            spec.convention,
        ))?;
        let s = m.scalars();
        *out = NvgEffectiveScalars {
            g_e: s.g_e,
            g_e_prime: s.g_e_prime,
            p: s.p,
            gamma_r: s.gamma_r,
            gamma_n: s.gamma_n,
            validity_ratio: s.validity_ratio,
            transfer_time: m.transfer_time(),
        };
        Ok(())
    })
}

/// Runs the configured experiment.
///
/// # Safety
/// `cfg` is a live config handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_run(cfg: *const NvgConfig, out: *mut *mut NvgResult) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        let cfg = cfg.as_ref().ok_or_else(|| invalid("config handle is null"))?;
        let outcome = lift(execute(&cfg.inner))?;
        let labels: Vec<String> = match &outcome {
            Outcome::Sweep(s) => std::iter::once(s.axis_name.clone())
                .chain(s.series.iter().map(|c| c.name.clone()))
                .collect(),
            Outcome::Table(t) => t.rows.iter().map(|r| format!("{} [{}]", r.quantity, r.unit)).collect(),
        };
        let names = labels
            .into_iter()
            .map(|n| CString::new(n).map_err(|_| invalid("label contains NUL")))
            .collect::<Result<_, _>>()?;
        *out = Box::into_raw(Box::new(NvgResult { outcome, names }));
        Ok(())
    })
}

/// # Safety
/// `res` is null or came from `nvg_run` and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvg_result_free(res: *mut NvgResult) {
    if !res.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(res))));
    }
}

/// 1 for a scalar table, 0 for a sweep, -1 for a null handle.
///
/// # Safety
/// `res` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn nvg_result_is_table(res: *const NvgResult) -> c_int {
    match res.as_ref() {
        Some(r) => matches!(r.outcome, Outcome::Table(_)) as c_int,
        None => -1,
    }
}

/// Shape of the result. Sweeps: one row per axis point, column 0 is the
/// axis. Tables: one row per quantity and a single value column.
///
/// # Safety
/// `res` is a live result handle; `rows` and `columns` are writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_result_shape(res: *const NvgResult, rows: *mut usize, columns: *mut usize) -> NvgStatus {
    guard(|| {
        out_ptr(rows)?;
        out_ptr(columns)?;
        let r = res.as_ref().ok_or_else(|| invalid("result handle is null"))?;
        let (n, m) = match &r.outcome {
            Outcome::Sweep(s) => (s.len(), s.series.len() + 1),
            Outcome::Table(t) => (t.rows.len(), 1),
        };
        *rows = n;
        *columns = m;
        Ok(())
    })
}

/// Column name of a sweep, or the `quantity [unit]` label of a table row.
/// The string lives as long as the result handle; null when out of range.
///
/// # Safety
/// `res` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn nvg_result_label(res: *const NvgResult, index: usize) -> *const c_char {
    res.as_ref()
        .and_then(|r| r.names.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Value at `(row, column)`.
///
/// # Safety
/// `res` is a live result handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_result_value(
    res: *const NvgResult,
    row: usize,
    column: usize,
    out: *mut f64,
) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        let r = res.as_ref().ok_or_else(|| invalid("result handle is null"))?;
        let v = match &r.outcome {
            Outcome::Sweep(s) if column == 0 => s.axis.get(row).copied(),
            Outcome::Sweep(s) => s.series.get(column - 1).and_then(|c| c.values.get(row)).copied(),
            Outcome::Table(t) if column == 0 => t.rows.get(row).map(|x| x.value),
            Outcome::Table(_) => None,
        };
        *out = v.ok_or_else(|| invalid(&format!("index ({row}, {column}) out of range")))?;
        Ok(())
    })
}

/// Writes the result to `path` in the CLI's CSV or JSON-lines layout;
/// `format` is an `NvgFormat` code.
///
/// # Safety
/// `res` is a live result handle; `path` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nvg_result_write(res: *const NvgResult, path: *const c_char, format: c_int) -> NvgStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| invalid("result handle is null"))?;
        let path = text(path, "path")?;
        let format = match format {
            f if f == NvgFormat::Csv as c_int => Format::Csv,
            f if f == NvgFormat::Jsonl as c_int => Format::Jsonl,
            f => return Err(invalid(&format!("unknown format code {f}"))),
        };
        lift(emit(&r.outcome, format, Path::new(path)))
    })
}

/// Closed-form sensor population at detuning `delta` (rad/s), sensor
/// angle `theta` (rad), coupling `g` (rad/s) and time `t` (s); `variant` is
/// an `NvgAnalyticVariant` code.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_analytic_population(
    delta: f64,
    theta: f64,
    g: f64,
    t: f64,
    variant: c_int,
    out: *mut f64,
) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        if ![delta, theta, g, t].iter().all(|x| x.is_finite()) {
            return Err(invalid("arguments must be finite"));
        }
        let v = match variant {
            v if v == NvgAnalyticVariant::Secular as c_int => AnalyticVariant::Secular,
            v if v == NvgAnalyticVariant::FullCoupling as c_int => AnalyticVariant::FullCoupling,
            v => return Err(invalid(&format!("unknown variant code {v}"))),
        };
        *out = analytic_population(delta, theta, g, t, v);
        Ok(())
    })
}

/// Quasi-steady electron polarization `exp(-t_reset / t1rho)`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvg_quasi_steady_polarization(t_reset: f64, t1rho: f64, out: *mut f64) -> NvgStatus {
    guard(|| {
        out_ptr(out)?;
        *out = lift(quasi_steady_polarization(t_reset, t1rho))?;
        Ok(())
    })
}
