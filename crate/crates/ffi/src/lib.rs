//! C interface to the sweep driver.
//!
//! Configurations and results are opaque heap handles owned by the caller
//! and released with the matching `*_free` function. Every fallible call
//! returns an [`NcStatus`]; the message of the most recent failure on the
//! calling thread is available from [`nc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nitsche_cut::experiment::{
    geometric_eps, run_sweep, write_csv, Example, ExperimentConfig, ResultRecord, Status,
};
use nitsche_cut::stabilization::FormVariant;
use nitsche_cut::Error;

/// Status codes of the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SliverDegenerate = 3,
    SolveFailed = 4,
    Io = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcExample {
    Ex1Tri = 0,
    Ex1Quad = 1,
    Ex2 = 2,
    Ex3 = 3,
    Ex4 = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcVariant {
    Nitsche = 0,
    Hybrid = 1,
}

/// Per-row outcome, mirroring the CSV `status` column.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcRowStatus {
    Ok = 0,
    SliverDegenerate = 1,
    SolveFailed = 2,
}

/// One sweep row. Diagnostic fields are NaN unless `has_diagnostics`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NcRecord {
    pub epsilon: f64,
    pub n_dofs: usize,
    pub m: usize,
    pub n: usize,
    pub lambda_max: f64,
    pub err_energy: f64,
    pub err_h1: f64,
    pub err_l2: f64,
    pub has_diagnostics: bool,
    pub c_est: f64,
    pub big_c_est: f64,
    pub cea_ratio: f64,
    pub status: NcRowStatus,
}

/// Opaque sweep configuration.
pub struct NcConfig {
    inner: ExperimentConfig,
}

/// Opaque sweep results together with the configuration that produced them.
pub struct NcResults {
    config: ExperimentConfig,
    records: Vec<ResultRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> NcStatus {
    match err {
        Error::Config(_) | Error::Input(_) => NcStatus::InvalidArgument,
        Error::SliverDegenerate { .. } => NcStatus::SliverDegenerate,
        Error::Singular { .. } | Error::Residual { .. } => NcStatus::SolveFailed,
        Error::Io(_) => NcStatus::Io,
        _ => NcStatus::Internal,
    }
}

fn fail(status: NcStatus, msg: &str) -> NcStatus {
    set_error(msg);
    status
}

/// Run `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (NcStatus, String)>) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcStatus::Ok,
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(NcStatus::Internal, "internal panic"),
    }
}

fn lift(err: Error) -> (NcStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (NcStatus, String) {
    (NcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn config_mut<'a>(config: *mut NcConfig) -> Result<&'a mut NcConfig, (NcStatus, String)> {
    config.as_mut().ok_or_else(|| null("config"))
}

/// Message of the most recent failed call on this thread, or an empty
/// string. The pointer stays valid until the next failure on the same thread.
#[no_mangle]
pub extern "C" fn nc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// New configuration with the defaults for `example` (K = 16, order 1,
/// ε = 2⁻⁴ … 2⁻²⁴, symmetric Nitsche, depth 2, no diagnostics).
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn nc_config_new(example: NcExample, out: *mut *mut NcConfig) -> NcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let example = match example {
            NcExample::Ex1Tri => Example::Ex1Tri,
            NcExample::Ex1Quad => Example::Ex1Quad,
            NcExample::Ex2 => Example::Ex2,
            NcExample::Ex3 => Example::Ex3,
            NcExample::Ex4 => Example::Ex4,
        };
        *out = Box::into_raw(Box::new(NcConfig {
            inner: ExperimentConfig::new(example),
        }));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from [`nc_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nc_config_free(config: *mut NcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_k(config: *mut NcConfig, k: usize) -> NcStatus {
    guard(|| {
        config_mut(config)?.inner.k = k;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_order(config: *mut NcConfig, order: usize) -> NcStatus {
    guard(|| {
        config_mut(config)?.inner.order = order;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_depth(config: *mut NcConfig, depth: usize) -> NcStatus {
    guard(|| {
        config_mut(config)?.inner.depth = depth;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_diagnostics(config: *mut NcConfig, on: bool) -> NcStatus {
    guard(|| {
        config_mut(config)?.inner.diagnostics = on;
        Ok(())
    })
}

/// `cap` is ignored for [`NcVariant::Nitsche`].
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_variant(
    config: *mut NcConfig,
    variant: NcVariant,
    cap: f64,
) -> NcStatus {
    guard(|| {
        let config = config_mut(config)?;
        config.inner.variant = match variant {
            NcVariant::Nitsche => FormVariant::SymmetricNitsche,
            NcVariant::Hybrid if cap > 0.0 && cap.is_finite() => {
                FormVariant::HybridNitschePenalty { cap }
            }
            NcVariant::Hybrid => {
                return Err((NcStatus::InvalidArgument, format!("invalid penalty cap {cap}")))
            }
        };
        Ok(())
    })
}

/// Geometric ε list `from, from·factor, …` down to `to`.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_eps_geometric(
    config: *mut NcConfig,
    from: f64,
    to: f64,
    factor: f64,
) -> NcStatus {
    guard(|| {
        let config = config_mut(config)?;
        config.inner.eps_list = geometric_eps(from, to, factor).map_err(lift)?;
        Ok(())
    })
}

/// Explicit ε list; must be strictly descending and positive.
///
/// # Safety
/// `config` must be null or a live handle; `eps` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nc_config_set_eps_list(
    config: *mut NcConfig,
    eps: *const f64,
    len: usize,
) -> NcStatus {
    guard(|| {
        let config = config_mut(config)?;
        if eps.is_null() {
            return Err(null("eps"));
        }
        let list = std::slice::from_raw_parts(eps, len).to_vec();
        let mut trial = config.inner.clone();
        trial.eps_list = list;
        trial.validate().map_err(lift)?;
        config.inner = trial;
        Ok(())
    })
}

/// Run the sweep. Rows with a degenerate parameter or failed solve are
/// reported through their row status; the call itself still succeeds.
///
/// # Safety
/// `config` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nc_run_sweep(config: *const NcConfig, out: *mut *mut NcResults) -> NcStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let records = run_sweep(&config.inner).map_err(lift)?;
        *out = Box::into_raw(Box::new(NcResults {
            config: config.inner.clone(),
            records,
        }));
        Ok(())
    })
}

/// # Safety
/// `results` must be null or a handle from [`nc_run_sweep`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nc_results_free(results: *mut NcResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `results` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_results_len(results: *const NcResults) -> usize {
    results.as_ref().map_or(0, |r| r.records.len())
}

/// # Safety
/// `results` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nc_results_get(
    results: *const NcResults,
    index: usize,
    out: *mut NcRecord,
) -> NcStatus {
    guard(|| {
        let results = results.as_ref().ok_or_else(|| null("results"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = results.records.get(index).ok_or_else(|| {
            (
                NcStatus::InvalidArgument,
                format!("row {index} out of range ({} rows)", results.records.len()),
            )
        })?;
        let d = r.diagnostics;
        *out = NcRecord {
            epsilon: r.epsilon,
            n_dofs: r.n_dofs,
            m: r.m,
            n: r.n,
            lambda_max: r.lambda_max,
            err_energy: r.err_energy,
            err_h1: r.err_h1,
            err_l2: r.err_l2,
            has_diagnostics: d.is_some(),
            c_est: d.map_or(f64::NAN, |d| d.c_est),
            big_c_est: d.map_or(f64::NAN, |d| d.big_c_est),
            cea_ratio: d.map_or(f64::NAN, |d| d.cea_ratio),
            status: match r.status {
                Status::Ok => NcRowStatus::Ok,
                Status::SliverDegenerate => NcRowStatus::SliverDegenerate,
                Status::SolveFailed => NcRowStatus::SolveFailed,
            },
        };
        Ok(())
    })
}

/// Write the results as CSV to the UTF-8 path `path`.
///
/// # Safety
/// `results` must be null or a live handle; `path` null or a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn nc_results_write_csv(results: *const NcResults, path: *const c_char) -> NcStatus {
    guard(|| {
        let results = results.as_ref().ok_or_else(|| null("results"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (NcStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let file = File::create(path).map_err(|e| lift(e.into()))?;
        write_csv(&results.config, &results.records, BufWriter::new(file)).map_err(lift)
    })
}
