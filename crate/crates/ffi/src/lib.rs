//! C ABI for `subseries`.
//!
//! Every fallible function returns an [`SsStatus`] and writes its result
//! through an out-pointer. On failure, [`ss_last_error_message`] describes the
//! error for the calling thread. Handles are opaque and freed by their
//! matching `*_free` function; freeing a null handle is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subseries::bounds::{tail_bound_cs, tail_bound_nd};
use subseries::entropy::{
    constant_c, constant_c_quadrature, constant_c_upper, covering_number, dudley_integral_for, AlphaMetric, DudleyIntegral,
    QuadratureConfig, WeightSequence,
};
use subseries::orlicz::{orlicz_norm_empirical, phi, phi_inv, SampleBatch};
use subseries::series::{decoupling_coefficient, CorrelationSpec};
use subseries::subgaussian::{default_t_grid, tau_empirical};
use subseries::verify::{csv_rows, default_suite, run_suite, CheckSpec, VerificationReport, CSV_HEADER};
use subseries::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    Domain = 1,
    Unsupported = 2,
    LengthMismatch = 3,
    Factorization = 4,
    Config = 5,
    Io = 6,
    NullPointer = 7,
    /// The norm or integral is unbounded / divergent.
    Unbounded = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::Domain(_) => SsStatus::Domain,
        Error::Unsupported(_) => SsStatus::Unsupported,
        Error::LengthMismatch { .. } => SsStatus::LengthMismatch,
        Error::Factorization(_) => SsStatus::Factorization,
        Error::Config(_) => SsStatus::Config,
        Error::Io(_) => SsStatus::Io,
    }
}

/// Runs `f`, recording errors and panics for the calling thread.
fn guard(f: impl FnOnce() -> Result<(), (SsStatus, String)>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside subseries");
            SsStatus::Panic
        }
    }
}

fn lib<T>(r: subseries::Result<T>) -> Result<T, (SsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SsStatus, String) {
    (SsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (SsStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], (SsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null("data"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

/// Message for the last failed call on this thread; empty if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `exp(x^2) - 1`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_phi(x: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(phi(x))?))
}

/// `sqrt(ln(1 + y))`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_phi_inv(y: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(phi_inv(y))?))
}

/// `C(alpha)` from the closed form.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_constant_c(alpha: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(constant_c(alpha))?))
}

/// `C(alpha)` by adaptive quadrature.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_constant_c_quadrature(alpha: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(constant_c_quadrature(alpha))?))
}

/// Closed-form upper bound on `C(alpha)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_constant_c_upper(alpha: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(constant_c_upper(alpha))?))
}

/// Empirical `phi`-Orlicz norm of `len` values. Returns `UNBOUNDED` when the
/// bracket cap is hit.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_orlicz_norm(values: *const f64, len: usize, tolerance: f64, out: *mut f64) -> SsStatus {
    guard(|| {
        let batch = lib(SampleBatch::new(slice(values, len)?.to_vec()))?;
        let est = lib(orlicz_norm_empirical(&batch, tolerance))?;
        let v = est.finite().ok_or((SsStatus::Unbounded, "norm exceeds the bracket cap".to_string()))?;
        write_out(out, v)
    })
}

/// Empirical subgaussian standard on the default grid `+-2^k`, `k = -4..3`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_tau_empirical(values: *const f64, len: usize, out: *mut f64) -> SsStatus {
    guard(|| {
        let batch = lib(SampleBatch::new(slice(values, len)?.to_vec()))?;
        write_out(out, lib(tau_empirical(&batch, &default_t_grid()))?.value)
    })
}

/// `2 exp(-t^2 / (4 A^2))`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_tail_bound_nd(t: f64, a: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(tail_bound_nd(t, a))?))
}

/// `2 exp(-t^2 / (2 B^2))`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_tail_bound_cs(t: f64, b: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(tail_bound_cs(t, b))?))
}

/// Decoupling coefficient `1 / (1 - |rho|)` of an AR(1) correlation.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_decoupling_ar1(rho: f64, out: *mut f64) -> SsStatus {
    guard(|| write_out(out, lib(decoupling_coefficient(&CorrelationSpec::Ar1 { rho }))?))
}

/// Opaque weighted pseudo-metric on the integers.
pub struct SsMetric {
    inner: AlphaMetric,
}

/// Builds `d(i, j) = |U_j - U_i|^alpha` from `len` nonnegative weights.
///
/// # Safety
/// `weights` must point to `len` readable doubles; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_metric_new(weights: *const f64, len: usize, alpha: f64, out: *mut *mut SsMetric) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let w = lib(WeightSequence::new(slice(weights, len)?.to_vec()))?;
        let inner = lib(AlphaMetric::new(w, alpha))?;
        out.write(Box::into_raw(Box::new(SsMetric { inner })));
        Ok(())
    })
}

/// # Safety
/// `metric` must be null or a handle from [`ss_metric_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_metric_free(metric: *mut SsMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// # Safety
/// `metric` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_metric_eval(metric: *const SsMetric, i: usize, j: usize, out: *mut f64) -> SsStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        write_out(out, m.inner.eval(i, j))
    })
}

/// Minimal number of open balls of radius `epsilon` covering `{0..max_index}`.
///
/// # Safety
/// `metric` must be a live handle; `out_count` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_metric_covering(metric: *const SsMetric, epsilon: f64, max_index: usize, out_count: *mut usize) -> SsStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        write_out(out_count, lib(covering_number(&m.inner, epsilon, max_index))?.count)
    })
}

/// Entropy integral of `{0..max_index}`; `UNBOUNDED` when divergent.
///
/// # Safety
/// `metric` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_metric_dudley(metric: *const SsMetric, max_index: usize, out: *mut f64) -> SsStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        match lib(dudley_integral_for(&m.inner, max_index, QuadratureConfig::default()))? {
            DudleyIntegral::Converged { value, .. } => write_out(out, value),
            DudleyIntegral::Divergent { .. } => Err((SsStatus::Unbounded, "entropy integral diverges".into())),
        }
    })
}

/// Opaque result of a verification suite run.
pub struct SsSuite {
    reports: Vec<VerificationReport>,
    json: CString,
    csv: CString,
}

/// Runs a suite. `checks_json` is a JSON array of checks, or null for the
/// built-in suite.
///
/// # Safety
/// `checks_json` must be null or a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_suite_run(checks_json: *const c_char, seed: u64, out: *mut *mut SsSuite) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let checks: Vec<CheckSpec> = if checks_json.is_null() {
            default_suite()
        } else {
            let text = CStr::from_ptr(checks_json).to_str().map_err(|_| (SsStatus::Config, "checks JSON is not UTF-8".to_string()))?;
            serde_json::from_str(text).map_err(|e| (SsStatus::Config, e.to_string()))?
        };
        let reports = lib(run_suite(&checks, seed))?;
        let json = serde_json::to_string(&reports).expect("serializable");
        let csv = format!("{CSV_HEADER}\n{}", csv_rows(&reports));
        out.write(Box::into_raw(Box::new(SsSuite {
            reports,
            json: CString::new(json).expect("no NUL in JSON"),
            csv: CString::new(csv).expect("no NUL in CSV"),
        })));
        Ok(())
    })
}

/// Reports as a JSON array; owned by the handle.
///
/// # Safety
/// `suite` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_suite_json(suite: *const SsSuite) -> *const c_char {
    suite.as_ref().map_or(ptr::null(), |s| s.json.as_ptr())
}

/// Summary table as CSV; owned by the handle.
///
/// # Safety
/// `suite` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_suite_csv(suite: *const SsSuite) -> *const c_char {
    suite.as_ref().map_or(ptr::null(), |s| s.csv.as_ptr())
}

/// True iff no check failed. False for a null handle.
///
/// # Safety
/// `suite` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_suite_all_passed(suite: *const SsSuite) -> bool {
    suite.as_ref().is_some_and(|s| !s.reports.iter().any(VerificationReport::failed))
}

/// # Safety
/// `suite` must be null or a handle from [`ss_suite_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_suite_free(suite: *mut SsSuite) {
    if !suite.is_null() {
        drop(Box::from_raw(suite));
    }
}
