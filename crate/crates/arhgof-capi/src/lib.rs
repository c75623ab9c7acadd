//! C ABI for the arhgof library.
//!
//! Conventions: objects cross the boundary as opaque handles allocated
//! here and released with the matching `_free`; fallible calls return an
//! [`ArhgofStatus`] and write their result through an out-pointer only
//! on `Ok`; the failure message of the most recent failed call on the
//! current thread is available from [`arhgof_last_error_message`].
//! Handles are not thread-safe; a handle may only be used by one thread
//! at a time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use arhgof::estimate::{estimate_autocorrelation, BasisChoice};
use arhgof::func::{FunctionalSeries, KernelMatrix};
use arhgof::io;
use arhgof::meptest::{run_gof_test, TestConfig, TestMode, TestOutcome};
use arhgof::rng::{Purpose, RngStream};
use arhgof::simulate::{config_cov_kernel, simulate_arh1, GaussianSpec, SimConfig};
use arhgof::Error;

/// Result of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArhgofStatus {
    /// Success.
    ArhgofOk = 0,
    /// A pointer argument was null or text was not valid UTF-8.
    ArhgofInvalidArgument = 1,
    /// Configuration or input data was rejected.
    ArhgofConfigError = 2,
    /// A numerical procedure failed.
    ArhgofNumericalError = 3,
    /// An internal panic was caught at the boundary.
    ArhgofPanic = 4,
}

use ArhgofStatus::*;

/// A simulated or loaded functional time series.
pub struct ArhgofSeries(FunctionalSeries);

/// An autocorrelation kernel (hypothesized or estimated).
pub struct ArhgofKernel(KernelMatrix);

/// The outcome of one goodness-of-fit test run.
pub struct ArhgofTestResult(TestOutcome);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: &Error) -> ArhgofStatus {
    set_last_error(&err.to_string());
    match err {
        Error::Numerical(_) => ArhgofNumericalError,
        _ => ArhgofConfigError,
    }
}

fn invalid(message: &str) -> ArhgofStatus {
    set_last_error(message);
    ArhgofInvalidArgument
}

fn guard(f: impl FnOnce() -> ArhgofStatus) -> ArhgofStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic crossed the C boundary");
            ArhgofPanic
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn opt_str<'a>(ptr: *const c_char) -> Result<Option<&'a str>, ArhgofStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(Some)
        .map_err(|_| invalid("string argument is not valid UTF-8"))
}

unsafe fn req_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ArhgofStatus> {
    match opt_str(ptr)? {
        Some(s) => Ok(s),
        None => Err(invalid(&format!("{what} must not be null"))),
    }
}

/// Message of the most recent failed call on this thread. The pointer
/// stays valid until the next failing call on the same thread. Never
/// null; empty before any failure.
#[no_mangle]
pub extern "C" fn arhgof_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Simulates a series from configuration text (`key = value` lines; null
/// for all defaults) and writes a new handle to `out`.
///
/// # Safety
/// `config` must be null or a valid NUL-terminated string; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_simulate(
    config: *const c_char,
    out: *mut *mut ArhgofSeries,
) -> ArhgofStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out must not be null");
        }
        let cfg = match opt_str(config) {
            Ok(Some(text)) => match SimConfig::parse(text) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e),
            },
            Ok(None) => SimConfig::default(),
            Err(status) => return status,
        };
        let spec = match cfg.build() {
            Ok(spec) => spec,
            Err(e) => return fail(&e),
        };
        match simulate_arh1(&spec, RngStream::new(cfg.seed, 0, Purpose::Series)) {
            Ok(series) => {
                *out = Box::into_raw(Box::new(ArhgofSeries(series)));
                ArhgofOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a series from a CSV file (header `t,node_0,...`).
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_read_csv(
    path: *const c_char,
    out: *mut *mut ArhgofSeries,
) -> ArhgofStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out must not be null");
        }
        let path = match req_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_series(path) {
            Ok(series) => {
                *out = Box::into_raw(Box::new(ArhgofSeries(series)));
                ArhgofOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes a series to a CSV file.
///
/// # Safety
/// `series` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_write_csv(
    series: *const ArhgofSeries,
    path: *const c_char,
) -> ArhgofStatus {
    guard(|| {
        let Some(series) = series.as_ref() else {
            return invalid("series must not be null");
        };
        let path = match req_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::write_series(path, &series.0) {
            Ok(()) => ArhgofOk,
            Err(e) => fail(&e),
        }
    })
}

/// Number of observations; 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_len(series: *const ArhgofSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Number of grid nodes per observation; 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_grid_len(series: *const ArhgofSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.grid().len())
}

/// Value at observation `t`, node `node`; NaN when out of range.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_value(
    series: *const ArhgofSeries,
    t: usize,
    node: usize,
) -> f64 {
    let Some(series) = series.as_ref() else {
        return f64::NAN;
    };
    if t >= series.0.len() || node >= series.0.grid().len() {
        return f64::NAN;
    }
    series.0.row(t)[node]
}

/// Releases a series handle (null is a no-op).
///
/// # Safety
/// `series` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn arhgof_series_free(series: *mut ArhgofSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Runs the goodness-of-fit test on a series.
///
/// `config` supplies the projection-direction laws (null = defaults);
/// `gamma0` is the hypothesized kernel (null = zero operator);
/// `n_projections` and `n_bootstrap` must be ≥ 1; `misspecified` tests
/// residuals against an operator estimated from the sample.
///
/// # Safety
/// `series` must be a live handle; `gamma0` null or a live handle;
/// `config` null or a valid NUL-terminated string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_run(
    series: *const ArhgofSeries,
    config: *const c_char,
    gamma0: *const ArhgofKernel,
    n_projections: usize,
    n_bootstrap: usize,
    standardized: bool,
    alpha: f64,
    seed: u64,
    misspecified: bool,
    out: *mut *mut ArhgofTestResult,
) -> ArhgofStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out must not be null");
        }
        let Some(series) = series.as_ref() else {
            return invalid("series must not be null");
        };
        let cfg = match opt_str(config) {
            Ok(Some(text)) => match SimConfig::parse(text) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e),
            },
            Ok(None) => SimConfig::default(),
            Err(status) => return status,
        };
        let grid = series.0.grid().clone();
        let zero;
        let gamma0 = match gamma0.as_ref() {
            Some(k) => &k.0,
            None => {
                zero = KernelMatrix::zero(grid.clone());
                &zero
            }
        };
        let build_dir = |sigma, theta| -> Result<GaussianSpec, Error> {
            GaussianSpec::centered(config_cov_kernel(&grid, sigma, theta)?)
        };
        let eps_dir = match build_dir(cfg.sigma_eps, cfg.theta_eps) {
            Ok(spec) => spec,
            Err(e) => return fail(&e),
        };
        let y_dir = match build_dir(cfg.sigma_y0, cfg.theta_y0) {
            Ok(spec) => spec,
            Err(e) => return fail(&e),
        };
        let test_cfg = TestConfig {
            n_projections,
            n_bootstrap,
            standardized,
            alpha,
            ..TestConfig::default()
        };
        let mode = if misspecified {
            TestMode::Misspecified
        } else {
            TestMode::Specified
        };
        match run_gof_test(
            &series.0,
            gamma0,
            &test_cfg,
            &eps_dir,
            &y_dir,
            RngStream::new(seed, 0, Purpose::Series),
            mode,
        ) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(ArhgofTestResult(outcome)));
                ArhgofOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Combined p-value; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_result_combined_p(result: *const ArhgofTestResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.combined_p)
}

/// Whether the combined p-value rejects at the configured level; false
/// for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_result_reject(result: *const ArhgofTestResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.reject)
}

/// Number of projections tested; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_result_n_projections(
    result: *const ArhgofTestResult,
) -> usize {
    result.as_ref().map_or(0, |r| r.0.per_projection.len())
}

/// Observed statistic of projection `index`; NaN when out of range.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_result_statistic(
    result: *const ArhgofTestResult,
    index: usize,
) -> f64 {
    result
        .as_ref()
        .and_then(|r| r.0.per_projection.get(index))
        .map_or(f64::NAN, |pr| pr.statistic)
}

/// Bootstrap p-value of projection `index`; NaN when out of range.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_result_p_value(
    result: *const ArhgofTestResult,
    index: usize,
) -> f64 {
    result
        .as_ref()
        .and_then(|r| r.0.per_projection.get(index))
        .map_or(f64::NAN, |pr| pr.p_value)
}

/// Releases a test-result handle (null is a no-op).
///
/// # Safety
/// `result` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn arhgof_test_result_free(result: *mut ArhgofTestResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Estimates the autocorrelation operator from a series. `k` is the
/// truncation level (0 = data-driven schedule); on success writes the
/// kernel handle to `out` and, when `out_k_n` is non-null, the level
/// actually used.
///
/// # Safety
/// `series` must be a live handle; `out` valid; `out_k_n` null or valid.
#[no_mangle]
pub unsafe extern "C" fn arhgof_estimate_run(
    series: *const ArhgofSeries,
    k: usize,
    out: *mut *mut ArhgofKernel,
    out_k_n: *mut usize,
) -> ArhgofStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out must not be null");
        }
        let Some(series) = series.as_ref() else {
            return invalid("series must not be null");
        };
        let k = if k == 0 { None } else { Some(k) };
        match estimate_autocorrelation(&series.0, k, BasisChoice::Empirical) {
            Ok(estimate) => {
                if !out_k_n.is_null() {
                    *out_k_n = estimate.k_n();
                }
                *out = Box::into_raw(Box::new(ArhgofKernel(estimate.operator().clone())));
                ArhgofOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a kernel from a CSV file (square matrix, no header).
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn arhgof_kernel_read_csv(
    path: *const c_char,
    out: *mut *mut ArhgofKernel,
) -> ArhgofStatus {
    guard(|| {
        if out.is_null() {
            return invalid("out must not be null");
        }
        let path = match req_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_kernel(path, None) {
            Ok(kernel) => {
                *out = Box::into_raw(Box::new(ArhgofKernel(kernel)));
                ArhgofOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes a kernel to a CSV file.
///
/// # Safety
/// `kernel` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn arhgof_kernel_write_csv(
    kernel: *const ArhgofKernel,
    path: *const c_char,
) -> ArhgofStatus {
    guard(|| {
        let Some(kernel) = kernel.as_ref() else {
            return invalid("kernel must not be null");
        };
        let path = match req_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::write_kernel(path, &kernel.0) {
            Ok(()) => ArhgofOk,
            Err(e) => fail(&e),
        }
    })
}

/// Grid size of a kernel; 0 for a null handle.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_kernel_grid_len(kernel: *const ArhgofKernel) -> usize {
    kernel.as_ref().map_or(0, |k| k.0.grid().len())
}

/// Kernel entry at (row, col); NaN when out of range.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_kernel_value(
    kernel: *const ArhgofKernel,
    row: usize,
    col: usize,
) -> f64 {
    let Some(kernel) = kernel.as_ref() else {
        return f64::NAN;
    };
    let m = kernel.0.grid().len();
    if row >= m || col >= m {
        return f64::NAN;
    }
    kernel.0.entries()[(row, col)]
}

/// Operator norm of the kernel as a map on the function space; NaN for
/// a null handle.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arhgof_kernel_operator_norm(kernel: *const ArhgofKernel) -> f64 {
    kernel.as_ref().map_or(f64::NAN, |k| k.0.operator_norm())
}

/// Releases a kernel handle (null is a no-op).
///
/// # Safety
/// `kernel` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn arhgof_kernel_free(kernel: *mut ArhgofKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}
