//! C interface to `dcca-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_load` functions and released with
//! the matching `*_free`. Every fallible call returns a [`DccaStatus`]; on failure the
//! message is available from [`dcca_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dcca_core::{make_scales, stat_dcca, CovTable, DccaError, HurstMode, SeriesPair, TestConfig, TestOutcome};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DccaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The scale configuration cannot work with the series length.
    Infeasible = 3,
    /// Non-finite data, zero fluctuation, failed factorization and similar.
    Numerical = 4,
    Io = 5,
    Parse = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// Covariance table handle.
pub struct DccaTable(CovTable);

/// Test configuration handle.
pub struct DccaConfig(TestConfig);

/// Test result handle.
pub struct DccaResult {
    outcome: TestOutcome,
    rho: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &DccaError) -> DccaStatus {
    use DccaError::*;
    match e {
        InfeasibleScales(_) | TooShort { .. } => DccaStatus::Infeasible,
        InvalidParameter(_) | LengthMismatch(..) | DimensionMismatch(_) => DccaStatus::InvalidArgument,
        Parse { .. } | Table(_) | TableVersion { .. } => DccaStatus::Parse,
        Io(_) => DccaStatus::Io,
        Internal(_) => DccaStatus::Internal,
        _ => DccaStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (DccaStatus, String)>) -> DccaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DccaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DccaStatus::Internal
        }
    }
}

fn lib<T>(r: dcca_core::Result<T>) -> Result<T, (DccaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DccaStatus, String) {
    (DccaStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (DccaStatus, String) {
    (DccaStatus::InvalidArgument, msg.into())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (DccaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn config_mut<'a>(c: *mut DccaConfig) -> Result<&'a mut TestConfig, (DccaStatus, String)> {
    c.as_mut().map(|c| &mut c.0).ok_or_else(|| null("config"))
}

fn put<T>(out: *mut *mut T, value: T) {
    // Callers have checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn dcca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dcca_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// The covariance table compiled into the library.
#[no_mangle]
pub extern "C" fn dcca_table_builtin(out: *mut *mut DccaTable) -> DccaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, DccaTable(lib(CovTable::builtin())?));
        Ok(())
    })
}

/// Loads a covariance table file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcca_table_load(path: *const c_char, out: *mut *mut DccaTable) -> DccaStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return Err(null("path or out"));
        }
        let p = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        put(out, DccaTable(lib(CovTable::load(Path::new(p)))?));
        Ok(())
    })
}

/// # Safety
/// `table` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dcca_table_free(table: *mut DccaTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Writes up to `capacity` log-spaced scales to `scales` and their count to `written`.
///
/// # Safety
/// `scales` must hold `capacity` elements; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcca_make_scales(
    len: usize,
    n_min: usize,
    n_max: usize,
    count: usize,
    degree: usize,
    scales: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> DccaStatus {
    guard(|| {
        if scales.is_null() || written.is_null() {
            return Err(null("scales or written"));
        }
        let set = lib(make_scales(len, n_min, n_max, count, degree))?;
        let s = set.scales();
        if s.len() > capacity {
            return Err(invalid(format!("{} scales do not fit in {capacity}", s.len())));
        }
        ptr::copy_nonoverlapping(s.as_ptr(), scales, s.len());
        *written = s.len();
        Ok(())
    })
}

/// New configuration: `κ = r`, level 0.05, automatic Hurst range, 10⁵ Monte Carlo draws, seed 0.
///
/// # Safety
/// `scales` must hold `count` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_new(
    scales: *const usize,
    count: usize,
    degree: usize,
    out: *mut *mut DccaConfig,
) -> DccaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = slice(scales, count, "scales")?;
        if s.is_empty() {
            return Err(invalid("no scales given"));
        }
        let cfg = TestConfig::new(s.to_vec(), degree);
        lib(cfg.validate())?;
        put(out, DccaConfig(cfg));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_free(config: *mut DccaConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Applies `edit` and rolls back if the result does not validate.
unsafe fn edit_config(config: *mut DccaConfig, edit: impl FnOnce(&mut TestConfig)) -> DccaStatus {
    guard(|| {
        let cfg = config_mut(config)?;
        let mut next = cfg.clone();
        edit(&mut next);
        lib(next.validate())?;
        *cfg = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_kappa(config: *mut DccaConfig, kappa: usize) -> DccaStatus {
    edit_config(config, |c| c.kappa = kappa)
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_level(config: *mut DccaConfig, level: f64) -> DccaStatus {
    edit_config(config, |c| c.level = level)
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_mc_samples(config: *mut DccaConfig, samples: usize) -> DccaStatus {
    edit_config(config, |c| c.mc_samples = samples)
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_seed(config: *mut DccaConfig, seed: u64) -> DccaStatus {
    edit_config(config, |c| c.seed = seed)
}

/// Uses the covariance at known Hurst exponents.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_hurst_known(config: *mut DccaConfig, h: f64, g: f64) -> DccaStatus {
    edit_config(config, |c| c.hurst = HurstMode::Known { h, g })
}

/// Uses the worst case over the given Hurst ranges.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_hurst_range(
    config: *mut DccaConfig,
    h_low: f64,
    h_high: f64,
    g_low: f64,
    g_high: f64,
) -> DccaStatus {
    edit_config(config, |c| c.hurst = HurstMode::Range { h_low, h_high, g_low, g_high })
}

/// Uses the worst case over DFA estimates `± margin`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcca_config_set_hurst_auto(config: *mut DccaConfig, margin: f64) -> DccaStatus {
    edit_config(config, |c| c.hurst = HurstMode::Auto { margin })
}

/// Tests two increment series of length `len` for long-range cross-correlation.
///
/// # Safety
/// `y1` and `y2` must hold `len` values; the handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcca_test(
    table: *const DccaTable,
    config: *const DccaConfig,
    y1: *const f64,
    y2: *const f64,
    len: usize,
    out: *mut *mut DccaResult,
) -> DccaStatus {
    guard(|| {
        let table = table.as_ref().ok_or_else(|| null("table"))?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = lib(SeriesPair::new(slice(y1, len, "y1")?.to_vec(), slice(y2, len, "y2")?.to_vec()))?;
        let (outcome, fl) = lib(stat_dcca(&pair, &config.0, &table.0))?;
        put(out, DccaResult { outcome, rho: fl.rho });
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dcca_result_free(result: *mut DccaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Summary numbers of a test result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DccaSummary {
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub p_value_stderr: f64,
    /// 1 when independence is rejected.
    pub reject: i32,
    /// +1 or -1 for the direction of a rejection, 0 otherwise.
    pub direction: i32,
    pub scales: usize,
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcca_result_summary(result: *const DccaResult, out: *mut DccaSummary) -> DccaStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let o = &r.outcome;
        *out = DccaSummary {
            statistic: o.statistic,
            threshold: o.theta_star,
            p_value: o.p_value,
            p_value_stderr: o.p_value_stderr,
            reject: o.reject as i32,
            direction: match o.direction {
                dcca_core::testkit::Direction::Positive => 1,
                dcca_core::testkit::Direction::Negative => -1,
                dcca_core::testkit::Direction::None => 0,
            },
            scales: r.rho.len(),
        };
        Ok(())
    })
}

/// Copies the per-scale coefficients into `rho`, which must hold at least
/// `DccaSummary::scales` values.
///
/// # Safety
/// `result` must be a live handle; `rho` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn dcca_result_rho(result: *const DccaResult, rho: *mut f64, capacity: usize) -> DccaStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if rho.is_null() {
            return Err(null("rho"));
        }
        if r.rho.len() > capacity {
            return Err(invalid(format!("{} coefficients do not fit in {capacity}", r.rho.len())));
        }
        ptr::copy_nonoverlapping(r.rho.as_ptr(), rho, r.rho.len());
        Ok(())
    })
}
