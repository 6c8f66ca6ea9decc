//! C ABI for the arm-core subspace clustering library.
//!
//! Conventions:
//! - Handles (`ArmMatrix`, `ArmSolveResult`, `ArmLabels`) are opaque; every
//!   handle returned by this library must be released with its `_free`
//!   function. `_free` accepts null.
//! - Functions that can fail return an [`ArmStatus`]; on any status other
//!   than `Ok` (or `NotConverged`, which still produces a result) the
//!   out-parameter is untouched and [`arm_last_error_message`] describes
//!   the failure for the calling thread. The message pointer stays valid
//!   until the next failing call on the same thread.
//! - Matrix buffers are row-major `rows x cols` `double` arrays.
//! - Panics never unwind across the boundary; they surface as
//!   `ArmStatus::Panic`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use arm_core::spectral::SpectralConfig;
use arm_core::{ErrorModel, SolverConfig};
use nalgebra::DMatrix;

/// Opaque dense matrix handle.
pub struct ArmMatrix {
    inner: DMatrix<f64>,
}

/// Opaque solver output handle.
pub struct ArmSolveResult {
    inner: arm_core::SolveResult,
}

/// Opaque cluster assignment handle.
pub struct ArmLabels {
    inner: arm_core::ClusterLabels,
}

/// Status code returned by fallible entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments failed validation (dimensions, flags, option values).
    InvalidArgument = 2,
    /// The computation produced or encountered non-finite values.
    NumericalError = 3,
    /// The solver exhausted its iteration cap; the result is still usable.
    NotConverged = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Residual norm selector for [`ArmSolverOptions`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmErrorModel {
    /// Squared Frobenius norm.
    Frobenius = 0,
    /// Entrywise l1 norm.
    L1 = 1,
    /// Column-wise l2,1 norm.
    L21 = 2,
}

/// Surrogate selector for [`ArmSolverOptions`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmMethod {
    /// Arctangent rank surrogate.
    Arctan = 0,
    /// Nuclear norm baseline.
    Nuclear = 1,
}

/// Solver parameters; obtain defaults from [`arm_solver_options_default`]
/// and override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ArmSolverOptions {
    /// Residual penalty weight.
    pub lambda: f64,
    /// Initial augmented-Lagrangian penalty.
    pub mu0: f64,
    /// Penalty growth factor per sweep.
    pub rho: f64,
    /// Relative feasibility tolerance.
    pub rel_tol: f64,
    /// Sweep cap.
    pub max_iters: usize,
    /// Residual norm.
    pub error_model: ArmErrorModel,
    /// Surrogate choice.
    pub method: ArmMethod,
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

fn status_of(err: &arm_core::Error) -> ArmStatus {
    match err {
        arm_core::Error::Numerical(_) => ArmStatus::NumericalError,
        _ => ArmStatus::InvalidArgument,
    }
}

/// Guards an FFI body against panics, translating them to `ArmStatus::Panic`.
fn guarded<F: FnOnce() -> ArmStatus>(body: F) -> ArmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            ArmStatus::Panic
        }
    }
}

/// Message describing the most recent failure on this thread, as a
/// NUL-terminated UTF-8 string. Never null; empty before the first failure.
#[no_mangle]
pub extern "C" fn arm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn arm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Default solver options (the general-purpose configuration:
/// lambda=2, mu0=10, rho=1.05, l2,1 residuals, arctangent surrogate).
#[no_mangle]
pub extern "C" fn arm_solver_options_default() -> ArmSolverOptions {
    let cfg = SolverConfig::motion();
    ArmSolverOptions {
        lambda: cfg.lambda,
        mu0: cfg.mu0,
        rho: cfg.rho,
        rel_tol: cfg.rel_tol,
        max_iters: cfg.max_iters,
        error_model: ArmErrorModel::L21,
        method: ArmMethod::Arctan,
    }
}

fn to_config(opts: &ArmSolverOptions) -> SolverConfig {
    let mut cfg = SolverConfig::motion();
    cfg.lambda = opts.lambda;
    cfg.mu0 = opts.mu0;
    cfg.rho = opts.rho;
    cfg.rel_tol = opts.rel_tol;
    cfg.max_iters = opts.max_iters;
    cfg.error_model = match opts.error_model {
        ArmErrorModel::Frobenius => ErrorModel::Frobenius,
        ArmErrorModel::L1 => ErrorModel::L1,
        ArmErrorModel::L21 => ErrorModel::L21,
    };
    cfg
}

/// Creates a matrix from a row-major `rows x cols` buffer; returns null on
/// invalid input (zero dimension, null data, non-finite entries).
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn arm_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
) -> *mut ArmMatrix {
    if data.is_null() {
        set_error("data pointer is null");
        return ptr::null_mut();
    }
    if rows == 0 || cols == 0 {
        set_error("matrix dimensions must be positive");
        return ptr::null_mut();
    }
    let slice = std::slice::from_raw_parts(data, rows * cols);
    if slice.iter().any(|v| !v.is_finite()) {
        set_error("matrix entries must be finite");
        return ptr::null_mut();
    }
    let inner = DMatrix::from_row_slice(rows, cols, slice);
    Box::into_raw(Box::new(ArmMatrix { inner }))
}

/// Number of rows; 0 if `m` is null.
#[no_mangle]
pub extern "C" fn arm_matrix_rows(m: *const ArmMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.nrows())
}

/// Number of columns; 0 if `m` is null.
#[no_mangle]
pub extern "C" fn arm_matrix_cols(m: *const ArmMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.ncols())
}

/// Copies entry `(row, col)` into `out`.
#[no_mangle]
pub extern "C" fn arm_matrix_get(
    m: *const ArmMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> ArmStatus {
    let (Some(m), Some(out)) = (unsafe { m.as_ref() }, unsafe { out.as_mut() }) else {
        set_error("null pointer argument");
        return ArmStatus::NullPointer;
    };
    if row >= m.inner.nrows() || col >= m.inner.ncols() {
        set_error("index out of bounds");
        return ArmStatus::InvalidArgument;
    }
    *out = m.inner[(row, col)];
    ArmStatus::Ok
}

/// Releases a matrix handle; accepts null.
#[no_mangle]
pub extern "C" fn arm_matrix_free(m: *mut ArmMatrix) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Solves for the self-expressive representation of `x`.
///
/// `options` may be null for defaults. On `Ok` and `NotConverged`, `*out`
/// receives a result handle owned by the caller.
#[no_mangle]
pub extern "C" fn arm_solve(
    x: *const ArmMatrix,
    options: *const ArmSolverOptions,
    out: *mut *mut ArmSolveResult,
) -> ArmStatus {
    guarded(|| {
        let (Some(x), Some(out)) = (unsafe { x.as_ref() }, unsafe { out.as_mut() }) else {
            set_error("null pointer argument");
            return ArmStatus::NullPointer;
        };
        let opts = unsafe { options.as_ref() }
            .copied()
            .unwrap_or_else(|| arm_solver_options_default());
        let cfg = to_config(&opts);
        let solve = match opts.method {
            ArmMethod::Arctan => arm_core::solve_arm(&x.inner, &cfg),
            ArmMethod::Nuclear => arm_core::solve_lrr_baseline(&x.inner, &cfg),
        };
        match solve {
            Ok(result) => {
                let converged = result.converged;
                *out = Box::into_raw(Box::new(ArmSolveResult { inner: result }));
                if converged {
                    ArmStatus::Ok
                } else {
                    set_error("solver hit the iteration cap before reaching tolerance");
                    ArmStatus::NotConverged
                }
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Representation matrix `Z` of a solve; caller owns the returned handle.
#[no_mangle]
pub extern "C" fn arm_solve_result_z(result: *const ArmSolveResult) -> *mut ArmMatrix {
    match unsafe { result.as_ref() } {
        Some(r) => Box::into_raw(Box::new(ArmMatrix { inner: r.inner.z.clone() })),
        None => {
            set_error("null result handle");
            ptr::null_mut()
        }
    }
}

/// Residual matrix `E` of a solve; caller owns the returned handle.
#[no_mangle]
pub extern "C" fn arm_solve_result_e(result: *const ArmSolveResult) -> *mut ArmMatrix {
    match unsafe { result.as_ref() } {
        Some(r) => Box::into_raw(Box::new(ArmMatrix { inner: r.inner.e.clone() })),
        None => {
            set_error("null result handle");
            ptr::null_mut()
        }
    }
}

/// Number of ALM sweeps performed; 0 if `result` is null.
#[no_mangle]
pub extern "C" fn arm_solve_result_iterations(result: *const ArmSolveResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |r| r.inner.iterations)
}

/// Whether the solve met its feasibility tolerance; false if null.
#[no_mangle]
pub extern "C" fn arm_solve_result_converged(result: *const ArmSolveResult) -> bool {
    unsafe { result.as_ref() }.is_some_and(|r| r.inner.converged)
}

/// Releases a solve result handle; accepts null.
#[no_mangle]
pub extern "C" fn arm_solve_result_free(result: *mut ArmSolveResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Full pipeline: solve, affinity graph, normalized cuts into `k` groups.
///
/// `alpha` is the affinity sharpening exponent (2 matches the library
/// default), `seed` drives the k-means restarts. On `Ok` and
/// `NotConverged`, `*out` receives a labels handle owned by the caller.
#[no_mangle]
pub extern "C" fn arm_cluster(
    x: *const ArmMatrix,
    k: usize,
    options: *const ArmSolverOptions,
    alpha: u32,
    seed: u64,
    out: *mut *mut ArmLabels,
) -> ArmStatus {
    guarded(|| {
        let (Some(x), Some(out)) = (unsafe { x.as_ref() }, unsafe { out.as_mut() }) else {
            set_error("null pointer argument");
            return ArmStatus::NullPointer;
        };
        let opts = unsafe { options.as_ref() }
            .copied()
            .unwrap_or_else(|| arm_solver_options_default());
        if !matches!(opts.method, ArmMethod::Arctan) {
            set_error("arm_cluster always uses the arctangent surrogate");
            return ArmStatus::InvalidArgument;
        }
        let spectral = SpectralConfig {
            k,
            seed,
            restarts: 20,
            kmeans_max_iters: 300,
        };
        match arm_core::subspace_cluster(
            &x.inner,
            &to_config(&opts),
            alpha,
            arm_core::affinity::DEFAULT_SVD_REL_TOL,
            &spectral,
        ) {
            Ok(outcome) => {
                let converged = outcome.solve.converged;
                *out = Box::into_raw(Box::new(ArmLabels { inner: outcome.labels }));
                if converged {
                    ArmStatus::Ok
                } else {
                    set_error("solver hit the iteration cap before reaching tolerance");
                    ArmStatus::NotConverged
                }
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Number of labelled samples; 0 if `labels` is null.
#[no_mangle]
pub extern "C" fn arm_labels_len(labels: *const ArmLabels) -> usize {
    unsafe { labels.as_ref() }.map_or(0, |l| l.inner.len())
}

/// Copies the label of sample `index` into `out`.
#[no_mangle]
pub extern "C" fn arm_labels_get(
    labels: *const ArmLabels,
    index: usize,
    out: *mut usize,
) -> ArmStatus {
    let (Some(l), Some(out)) = (unsafe { labels.as_ref() }, unsafe { out.as_mut() }) else {
        set_error("null pointer argument");
        return ArmStatus::NullPointer;
    };
    match l.inner.as_slice().get(index) {
        Some(&label) => {
            *out = label;
            ArmStatus::Ok
        }
        None => {
            set_error("index out of bounds");
            ArmStatus::InvalidArgument
        }
    }
}

/// Releases a labels handle; accepts null.
#[no_mangle]
pub extern "C" fn arm_labels_free(labels: *mut ArmLabels) {
    if !labels.is_null() {
        drop(unsafe { Box::from_raw(labels) });
    }
}
