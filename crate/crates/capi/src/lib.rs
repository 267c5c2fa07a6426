//! C ABI for the codedcomp library.
//!
//! The surface follows the usual opaque-handle pattern: a `CcScheme`
//! wraps one scheme configuration plus its trainable parameters; every
//! fallible call returns a `CcStatus` and stores a thread-local message
//! retrievable with `cc_last_error`. Buffers cross the boundary as raw
//! `double` pointers with lengths implied by the handle's dimensions
//! (matrices are column-major, matching the library).

use codedcomp::checkpoint::{load_scheme, save_scheme};
use codedcomp::commands::run_eval;
use codedcomp::config::RunConfig;
use codedcomp::datagen::{ProblemId, ProblemSpec};
use codedcomp::error::Error;
use codedcomp::lcc::lcc_recovery_threshold;
use codedcomp::linalg::Matrix;
use codedcomp::scheme::{train_scheme, SchemeConfig, SchemeParams, TrainOptions};
use codedcomp::sim::{run_learned, ClusterConfig, ErasureModel};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CcStatus {
    CcOk = 0,
    CcErrInvalidArgument = 1,
    CcErrIo = 2,
    CcErrDecodeFailure = 3,
    CcErrNumeric = 4,
    CcErrInternal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> CcStatus {
    match err {
        Error::Io(_) | Error::Checkpoint(_) => CcStatus::CcErrIo,
        Error::DecodeFailure { .. } | Error::InsufficientResults { .. } => {
            CcStatus::CcErrDecodeFailure
        }
        Error::NanGradient { .. } | Error::NanLoss { .. } | Error::DegenerateInput(_) => {
            CcStatus::CcErrNumeric
        }
        _ => CcStatus::CcErrInvalidArgument,
    }
}

fn fail(err: Error) -> CcStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Opaque scheme handle: configuration, problem binding, and parameters.
pub struct CcScheme {
    cfg: SchemeConfig,
    problem: ProblemSpec,
    params: SchemeParams,
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// R = G·P + 1 for the learned scheme.
#[no_mangle]
pub extern "C" fn cc_recovery_threshold(g: u32, p: u32) -> u32 {
    g * p + 1
}

/// R = (K−1)·d + 1 for the exact LCC baseline.
#[no_mangle]
pub extern "C" fn cc_lcc_recovery_threshold(k: u32, degree: u32) -> u32 {
    if k == 0 {
        return 0;
    }
    lcc_recovery_threshold(k as usize, degree as usize) as u32
}

unsafe fn parse_problem(problem: *const c_char) -> Result<ProblemId, CcStatus> {
    if problem.is_null() {
        set_error("problem name is null");
        return Err(CcStatus::CcErrInvalidArgument);
    }
    let s = CStr::from_ptr(problem).to_str().map_err(|_| {
        set_error("problem name is not valid UTF-8");
        CcStatus::CcErrInvalidArgument
    })?;
    ProblemId::parse(s).map_err(fail)
}

/// Creates a freshly initialized scheme for `problem` (eig | eigvec |
/// expm | det) with matrix dimension `m`, `k` inputs, and polynomial
/// degrees `g`, `p`. On success writes the handle to `out`.
///
/// # Safety
/// `problem` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_new(
    m: u32,
    k: u32,
    g: u32,
    p: u32,
    problem: *const c_char,
    seed: u64,
    out: *mut *mut CcScheme,
) -> CcStatus {
    if out.is_null() {
        set_error("output handle pointer is null");
        return CcStatus::CcErrInvalidArgument;
    }
    *out = ptr::null_mut();
    let id = match parse_problem(problem) {
        Ok(id) => id,
        Err(status) => return status,
    };
    let spec = ProblemSpec::new(id, m as usize);
    let cfg = SchemeConfig::new(
        m as usize,
        k as usize,
        g as usize,
        p as usize,
        spec.output_dim(),
    );
    if let Err(e) = cfg.validate() {
        return fail(e);
    }
    let params = SchemeParams::init(&cfg, seed);
    *out = Box::into_raw(Box::new(CcScheme {
        cfg,
        problem: spec,
        params,
    }));
    CcStatus::CcOk
}

/// Releases a handle. A null pointer is a no-op.
///
/// # Safety
/// `scheme` must have come from `cc_scheme_new`/`cc_scheme_load` and not
/// already be freed.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_free(scheme: *mut CcScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

unsafe fn path_from<'a>(ptr: *const c_char) -> Result<&'a Path, CcStatus> {
    if ptr.is_null() {
        set_error("path is null");
        return Err(CcStatus::CcErrInvalidArgument);
    }
    let s = CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("path is not valid UTF-8");
        CcStatus::CcErrInvalidArgument
    })?;
    Ok(Path::new(s))
}

/// Saves the scheme in the checkpoint container format.
///
/// # Safety
/// `scheme` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_save(scheme: *const CcScheme, path: *const c_char) -> CcStatus {
    let Some(handle) = scheme.as_ref() else {
        set_error("scheme handle is null");
        return CcStatus::CcErrInvalidArgument;
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match save_scheme(path, &handle.cfg, &handle.params) {
        Ok(()) => CcStatus::CcOk,
        Err(e) => fail(e),
    }
}

/// Loads a checkpoint and binds it to `problem` for training/evaluation.
///
/// # Safety
/// `path` and `problem` must be NUL-terminated strings; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_load(
    path: *const c_char,
    problem: *const c_char,
    out: *mut *mut CcScheme,
) -> CcStatus {
    if out.is_null() {
        set_error("output handle pointer is null");
        return CcStatus::CcErrInvalidArgument;
    }
    *out = ptr::null_mut();
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let id = match parse_problem(problem) {
        Ok(id) => id,
        Err(status) => return status,
    };
    match load_scheme(path) {
        Ok((cfg, params)) => {
            let spec = ProblemSpec::new(id, cfg.m);
            if spec.output_dim() != cfg.v {
                set_error("checkpoint output dimension does not match problem");
                return CcStatus::CcErrInvalidArgument;
            }
            *out = Box::into_raw(Box::new(CcScheme {
                cfg,
                problem: spec,
                params,
            }));
            CcStatus::CcOk
        }
        Err(e) => fail(e),
    }
}

/// Trains in place over `epochs` × `batches_per_epoch` × `batch_size`
/// fresh instances and keeps the best-epoch parameters. Writes the best
/// mean epoch loss to `out_best_loss` when non-null.
///
/// # Safety
/// `scheme` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_train(
    scheme: *mut CcScheme,
    epochs: u32,
    batches_per_epoch: u32,
    batch_size: u32,
    seed: u64,
    out_best_loss: *mut f64,
) -> CcStatus {
    let Some(handle) = scheme.as_mut() else {
        set_error("scheme handle is null");
        return CcStatus::CcErrInvalidArgument;
    };
    let opts = TrainOptions {
        epochs: epochs as usize,
        batches_per_epoch: batches_per_epoch.max(1) as usize,
        batch_size: batch_size.max(1) as usize,
        ..TrainOptions::default()
    };
    match train_scheme(&handle.cfg, &handle.problem, &opts, seed) {
        Ok(outcome) => {
            if let Some(abort) = outcome.aborted {
                set_error(&format!(
                    "training aborted at epoch {}, batch {}: {}",
                    abort.epoch, abort.batch, abort.reason
                ));
                handle.params = outcome.params;
                return CcStatus::CcErrNumeric;
            }
            if !out_best_loss.is_null() {
                *out_best_loss = outcome.best_loss;
            }
            handle.params = outcome.params;
            CcStatus::CcOk
        }
        Err(e) => fail(e),
    }
}

/// Evaluates on `instances` fresh test sets through the simulated
/// encode → erasure → decode path with `n_workers` workers (`0` means
/// exactly the recovery threshold), `erasures` of them erased. Writes the
/// mean NRMSE to `out_mean_nrmse`.
///
/// # Safety
/// `scheme` must be a live handle; `out_mean_nrmse` valid or null.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_eval(
    scheme: *const CcScheme,
    instances: u32,
    n_workers: u32,
    erasures: u32,
    seed: u64,
    out_mean_nrmse: *mut f64,
) -> CcStatus {
    let Some(handle) = scheme.as_ref() else {
        set_error("scheme handle is null");
        return CcStatus::CcErrInvalidArgument;
    };
    let mut cfg = RunConfig::default();
    cfg.problem = handle.problem.id.cli_name().to_string();
    cfg.m = handle.cfg.m;
    cfg.k = handle.cfg.k;
    cfg.g = handle.cfg.g;
    cfg.p = handle.cfg.p;
    cfg.workers = n_workers as usize;
    cfg.erasures = erasures as usize;
    cfg.eval_instances = instances.max(1) as usize;
    cfg.seed = seed;
    match run_eval(&cfg, &handle.cfg, &handle.params) {
        Ok(stats) => {
            if !stats.failed_instances.is_empty() {
                set_error(&format!(
                    "{} of {} instances fell below the recovery threshold",
                    stats.failed_instances.len(),
                    cfg.eval_instances
                ));
                return CcStatus::CcErrDecodeFailure;
            }
            if !out_mean_nrmse.is_null() {
                *out_mean_nrmse = stats.mean_nrmse();
            }
            CcStatus::CcOk
        }
        Err(e) => fail(e),
    }
}

/// Runs one input set through the full coded path and writes the decoded
/// outputs. `inputs` holds K column-major m×m matrices back to back
/// (k·m·m doubles); `out` receives k·v doubles (anchor-major).
///
/// # Safety
/// `scheme` must be a live handle; `inputs` must hold k·m·m readable
/// doubles and `out` k·v writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cc_scheme_infer(
    scheme: *const CcScheme,
    inputs: *const f64,
    n_workers: u32,
    erasures: u32,
    seed: u64,
    out: *mut f64,
) -> CcStatus {
    let Some(handle) = scheme.as_ref() else {
        set_error("scheme handle is null");
        return CcStatus::CcErrInvalidArgument;
    };
    if inputs.is_null() || out.is_null() {
        set_error("input or output buffer is null");
        return CcStatus::CcErrInvalidArgument;
    }
    let (m, k, v) = (handle.cfg.m, handle.cfg.k, handle.cfg.v);
    let raw = std::slice::from_raw_parts(inputs, k * m * m);
    let matrices: Vec<Matrix> = raw
        .chunks_exact(m * m)
        .map(|chunk| Matrix::from_col_major(m, m, chunk.to_vec()).expect("chunk size fixed"))
        .collect();

    let threshold = handle.cfg.recovery_threshold();
    let n = if n_workers == 0 {
        threshold
    } else {
        n_workers as usize
    };
    let erased = codedcomp::config::seeded_subset(seed, n, erasures as usize);
    let cluster = ClusterConfig {
        n_workers: n,
        base_delay: 1.0,
        jitter_mean: 0.5,
        erasure: if erased.is_empty() {
            ErasureModel::None
        } else {
            ErasureModel::Explicit { workers: erased }
        },
        seed,
    };
    match run_learned(&handle.params, &handle.cfg, &matrices, &cluster) {
        Ok((decoded, _)) => {
            let sink = std::slice::from_raw_parts_mut(out, k * v);
            for (i, f_hat) in decoded.iter().enumerate() {
                sink[i * v..(i + 1) * v].copy_from_slice(f_hat);
            }
            CcStatus::CcOk
        }
        Err(e) => fail(e),
    }
}
