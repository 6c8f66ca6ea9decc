//! Augmented-Lagrangian solver for self-expressive subspace recovery.
//!
//! Given samples as columns of `X`, the solver seeks a representation
//! `X = X Z + E` whose coefficient matrix `Z` has low arctangent rank and
//! whose residual `E` is small under a chosen error norm:
//!
//! ```text
//! min_{Z,E}  sum_i arctan(sigma_i(Z)) + lambda * ||E||_l
//! s.t.       X = X Z + E
//! ```
//!
//! The constraint is split with an auxiliary `J = Z` so the spectral term
//! only touches `J`. With multipliers `Y1, Y2` and penalty `mu`, one sweep
//! updates each block at its exact (or proximal) minimizer:
//!
//! ```text
//! Z  <-  (I + X^T X)^{-1} [ X^T (X - E) + J + (X^T Y1 + Y2) / mu ]
//! J  <-  prox of the spectral term at  Z - Y2 / mu
//! E  <-  shrinkage of  Q = X - X Z + Y1 / mu   (model-dependent)
//! Y1 <-  Y1 + mu (X - X Z - E)
//! Y2 <-  Y2 + mu (J - Z)
//! mu <-  rho * mu
//! ```
//!
//! The `(I + X^T X)` system is factored once and reused every iteration.
//! Iteration stops when both relative residuals `||X - XZ - E||_F / ||X||_F`
//! and `||J - Z||_F / ||X||_F` fall below `rel_tol`, or after `max_iters`
//! sweeps. The same scaffold with a singular-value-thresholding `J`-step
//! yields the nuclear-norm baseline ([`solve_lrr_baseline`]).

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::prox::{
    arctan_rank, prox_arctan_matrix, shrink_l1, shrink_l21, svt_with_spectrum, DcConfig,
};

/// Residual norm applied to `E` in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorModel {
    /// Squared Frobenius norm, for dense small-variance noise.
    Frobenius,
    /// Entrywise l1 norm, for sparse gross corruption.
    L1,
    /// Column-sum of l2 norms, for sample-specific corruption.
    L21,
}

impl ErrorModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorModel::Frobenius => "fro",
            ErrorModel::L1 => "l1",
            ErrorModel::L21 => "l21",
        }
    }
}

impl std::str::FromStr for ErrorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fro" | "frobenius" => Ok(ErrorModel::Frobenius),
            "l1" => Ok(ErrorModel::L1),
            "l21" | "l2,1" => Ok(ErrorModel::L21),
            other => Err(Error::Config(format!(
                "unknown error model {other:?} (expected \"fro\", \"l1\", or \"l21\")"
            ))),
        }
    }
}

/// Full solver parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight of the residual penalty.
    pub lambda: f64,
    /// Initial ALM penalty `mu^0`.
    pub mu0: f64,
    /// Penalty growth factor per sweep, `>= 1`.
    pub rho: f64,
    pub error_model: ErrorModel,
    /// Relative feasibility tolerance on both residuals.
    pub rel_tol: f64,
    /// Hard cap on ALM sweeps.
    pub max_iters: usize,
    /// Inner DC loop controls.
    pub dc: DcConfig,
    /// When set, asserts blockwise descent of the augmented Lagrangian
    /// after every update (costly; intended for tests).
    pub debug_checks: bool,
}

impl SolverConfig {
    /// Preset tuned for motion-style data: column-sparse corruption.
    pub fn motion() -> Self {
        SolverConfig {
            lambda: 2.0,
            mu0: 10.0,
            rho: 1.05,
            error_model: ErrorModel::L21,
            rel_tol: 1e-5,
            max_iters: 150,
            dc: DcConfig::default(),
            debug_checks: false,
        }
    }

    /// Preset tuned for face-style data: gross entrywise corruption.
    pub fn face() -> Self {
        SolverConfig {
            lambda: 1e-5,
            mu0: 1.7,
            rho: 1.03,
            error_model: ErrorModel::L1,
            ..SolverConfig::motion()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.mu0 > 0.0) || !self.mu0.is_finite() {
            return Err(Error::Config(format!("mu0 must be positive, got {}", self.mu0)));
        }
        if !(self.rho >= 1.0) || !self.rho.is_finite() {
            return Err(Error::Config(format!("rho must be >= 1, got {}", self.rho)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        self.dc.validate()
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::motion()
    }
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1-based sweep index.
    pub iter: usize,
    /// Objective at the current `(J, E)` pair.
    pub objective: f64,
    /// `||X - XZ - E||_F / ||X||_F`.
    pub r1: f64,
    /// `||J - Z||_F / ||X||_F`.
    pub r2: f64,
    /// Penalty value used by this sweep.
    pub mu: f64,
    /// Inner DC sweeps consumed by the `J` update (0 for the SVT baseline).
    pub dc_iters: usize,
    /// Multiplier magnitudes after the sweep.
    pub y1_max_abs: f64,
    pub y2_max_abs: f64,
}

/// Solver output: representation, residual, and the full iteration trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub z: DMatrix<f64>,
    pub e: DMatrix<f64>,
    /// Auxiliary spectral block; equals `z` up to `rel_tol` when converged.
    pub j: DMatrix<f64>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    /// Sweeps actually performed (`trace.len()`).
    pub iterations: usize,
    /// `sum_i arctan(sigma_i(Z*))` of the final representation.
    pub arctan_rank: f64,
    /// `||Z*||_*`, reported alongside for comparison.
    pub nuclear_norm: f64,
    /// Extreme singular values of `X` (conditioning diagnostic; the normal
    /// system `I + X^T X` is well-posed regardless).
    pub x_sigma_min: f64,
    pub x_sigma_max: f64,
}

/// Cached factorization of the normal system `I + X^T X`.
pub struct SystemCache {
    chol: Cholesky<f64, Dyn>,
}

/// Factors `I + X^T X` once; the matrix is symmetric positive definite for
/// any real `X`, so the factorization exists whenever `X` is finite.
pub fn precompute_system(x: &DMatrix<f64>) -> Result<SystemCache> {
    let n = x.ncols();
    let mut gram = x.transpose() * x;
    for i in 0..n {
        gram[(i, i)] += 1.0;
    }
    let chol = Cholesky::new(gram)
        .ok_or_else(|| Error::Numerical("Cholesky of I + X^T X failed (non-finite input?)".into()))?;
    Ok(SystemCache { chol })
}

impl SystemCache {
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }
}

/// Exact minimizer of the `Z` block: solves
/// `(I + X^T X) Z = X^T (X - E) + J + (X^T Y1 + Y2) / mu`.
pub fn update_z(
    cache: &SystemCache,
    x: &DMatrix<f64>,
    e: &DMatrix<f64>,
    j: &DMatrix<f64>,
    y1: &DMatrix<f64>,
    y2: &DMatrix<f64>,
    mu: f64,
) -> DMatrix<f64> {
    let rhs = x.transpose() * (x - e) + j + (x.transpose() * y1 + y2) / mu;
    cache.solve(&rhs)
}

/// Exact minimizer of the `E` block: shrinks `Q = X - X Z + Y1 / mu`.
pub fn update_e(
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    y1: &DMatrix<f64>,
    mu: f64,
    lambda: f64,
    model: ErrorModel,
) -> DMatrix<f64> {
    let q = x - x * z + y1 / mu;
    match model {
        // min lambda ||E||_F^2 + mu/2 ||E - Q||_F^2  =>  E = mu Q / (mu + 2 lambda)
        ErrorModel::Frobenius => q * (mu / (mu + 2.0 * lambda)),
        ErrorModel::L1 => shrink_l1(&q, lambda / mu),
        ErrorModel::L21 => shrink_l21(&q, lambda / mu),
    }
}

/// Gradient-ascent multiplier step:
/// `Y1 += mu (X - XZ - E)`, `Y2 += mu (J - Z)`.
pub fn update_multipliers(
    y1: &mut DMatrix<f64>,
    y2: &mut DMatrix<f64>,
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    e: &DMatrix<f64>,
    j: &DMatrix<f64>,
    mu: f64,
) {
    *y1 += (x - x * z - e) * mu;
    *y2 += (j - z) * mu;
}

/// Residual penalty `||E||_l`: squared Frobenius, entrywise l1, or column
/// l2 sums.
pub fn penalty_value(e: &DMatrix<f64>, model: ErrorModel) -> f64 {
    match model {
        ErrorModel::Frobenius => e.norm_squared(),
        ErrorModel::L1 => e.iter().map(|v| v.abs()).sum(),
        ErrorModel::L21 => e.column_iter().map(|c| c.norm()).sum(),
    }
}

/// Objective `sum_i arctan(sigma_i(M)) + lambda ||E||_l`, evaluating the
/// spectrum of `m` (either the `Z` or the `J` block) via SVD.
pub fn objective_value(
    m: &DMatrix<f64>,
    e: &DMatrix<f64>,
    lambda: f64,
    model: ErrorModel,
) -> Result<f64> {
    let spectrum = crate::svd::singular_values(m)?;
    Ok(objective_from_spectrum(spectrum.as_slice(), e, lambda, model))
}

/// Same objective when the spectrum is already at hand (avoids a re-SVD).
pub fn objective_from_spectrum(
    spectrum: &[f64],
    e: &DMatrix<f64>,
    lambda: f64,
    model: ErrorModel,
) -> f64 {
    arctan_rank(spectrum) + lambda * penalty_value(e, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Arm,
    Lrr,
}

fn surrogate_value(method: Method, spectrum: &[f64]) -> f64 {
    match method {
        Method::Arm => arctan_rank(spectrum),
        Method::Lrr => spectrum.iter().sum(),
    }
}

/// Augmented Lagrangian at the given block values (debug checks only).
#[allow(clippy::too_many_arguments)]
fn augmented_lagrangian(
    method: Method,
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    j: &DMatrix<f64>,
    e: &DMatrix<f64>,
    y1: &DMatrix<f64>,
    y2: &DMatrix<f64>,
    mu: f64,
    lambda: f64,
    model: ErrorModel,
) -> f64 {
    let spectrum = crate::svd::singular_values(j).expect("SVD of debug-check iterate");
    let r1 = x - x * z - e;
    let r2 = j - z;
    surrogate_value(method, spectrum.as_slice())
        + lambda * penalty_value(e, model)
        + y1.dot(&r1)
        + y2.dot(&r2)
        + 0.5 * mu * (r1.norm_squared() + r2.norm_squared())
}

macro_rules! debug_descent {
    ($cfg:expr, $before:expr, $after:expr, $block:literal) => {
        if $cfg.debug_checks {
            let slack = 1e-7 * (1.0 + $before.abs());
            assert!(
                $after <= $before + slack,
                concat!($block, " update increased the augmented Lagrangian: {} -> {}"),
                $before,
                $after
            );
        }
    };
}

fn run_alm(x: &DMatrix<f64>, cfg: &SolverConfig, method: Method) -> Result<SolveResult> {
    cfg.validate()?;
    let (m, n) = (x.nrows(), x.ncols());
    if m == 0 || n == 0 {
        return Err(Error::Dimension("input matrix must be non-empty".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("input matrix contains non-finite values".into()));
    }

    let cache = precompute_system(x)?;
    let x_spectrum = crate::svd::singular_values(x)?;
    let x_sigma_max = x_spectrum.max();
    let x_sigma_min = x_spectrum.min();

    let x_norm = x.norm();
    let denom = if x_norm > 0.0 { x_norm } else { 1.0 };

    let mut j = DMatrix::<f64>::identity(n, n);
    let mut e = DMatrix::<f64>::zeros(m, n);
    let mut y1 = DMatrix::<f64>::zeros(m, n);
    let mut y2 = DMatrix::<f64>::zeros(n, n);
    let mut mu = cfg.mu0;
    let mut z = DMatrix::<f64>::zeros(n, n);

    let mut trace = Vec::with_capacity(cfg.max_iters.min(512));
    let mut converged = false;

    for iter in 1..=cfg.max_iters {
        let l_before = cfg.debug_checks.then(|| {
            augmented_lagrangian(method, x, &z, &j, &e, &y1, &y2, mu, cfg.lambda, cfg.error_model)
        });

        z = update_z(&cache, x, &e, &j, &y1, &y2, mu);
        if let Some(before) = l_before {
            let after =
                augmented_lagrangian(method, x, &z, &j, &e, &y1, &y2, mu, cfg.lambda, cfg.error_model);
            debug_descent!(cfg, before, after, "Z");
        }

        let anchor = &z - &y2 / mu;
        let l_before_j = cfg.debug_checks.then(|| {
            augmented_lagrangian(method, x, &z, &j, &e, &y1, &y2, mu, cfg.lambda, cfg.error_model)
        });
        let (spectrum, dc_iters) = match method {
            Method::Arm => {
                let out = prox_arctan_matrix(&anchor, mu, &cfg.dc)?;
                j = out.matrix;
                (out.spectrum, out.dc_iters)
            }
            Method::Lrr => {
                let (matrix, spectrum) = svt_with_spectrum(&anchor, 1.0 / mu)?;
                j = matrix;
                (spectrum, 0)
            }
        };
        if let Some(before) = l_before_j {
            let after =
                augmented_lagrangian(method, x, &z, &j, &e, &y1, &y2, mu, cfg.lambda, cfg.error_model);
            debug_descent!(cfg, before, after, "J");
        }

        let l_before_e = cfg.debug_checks.then(|| {
            augmented_lagrangian(method, x, &z, &j, &e, &y1, &y2, mu, cfg.lambda, cfg.error_model)
        });
        e = update_e(x, &z, &y1, mu, cfg.lambda, cfg.error_model);
        if let Some(before) = l_before_e {
            let after =
                augmented_lagrangian(method, x, &z, &j, &e, &y1, &y2, mu, cfg.lambda, cfg.error_model);
            debug_descent!(cfg, before, after, "E");
        }

        update_multipliers(&mut y1, &mut y2, x, &z, &e, &j, mu);

        let r1 = (x - x * &z - &e).norm() / denom;
        let r2 = (&j - &z).norm() / denom;
        let objective = surrogate_value(method, &spectrum) + cfg.lambda * penalty_value(&e, cfg.error_model);
        if !objective.is_finite() || !r1.is_finite() || !r2.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite state at sweep {iter} (objective {objective}, r1 {r1}, r2 {r2})"
            )));
        }

        trace.push(TraceRecord {
            iter,
            objective,
            r1,
            r2,
            mu,
            dc_iters,
            y1_max_abs: y1.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
            y2_max_abs: y2.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
        });

        if r1.max(r2) <= cfg.rel_tol {
            converged = true;
            break;
        }
        mu *= cfg.rho;
    }

    let z_spectrum = crate::svd::singular_values(&z)?;
    let iterations = trace.len();
    Ok(SolveResult {
        arctan_rank: arctan_rank(z_spectrum.as_slice()),
        nuclear_norm: z_spectrum.iter().sum(),
        z,
        e,
        j,
        trace,
        converged,
        iterations,
        x_sigma_min,
        x_sigma_max,
    })
}

/// Solves the arctangent-rank program for `X = XZ + E`.
pub fn solve_arm(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    run_alm(x, cfg, Method::Arm)
}

/// Nuclear-norm baseline on the identical scaffold: only the `J` update
/// differs (singular value thresholding at `1/mu`). Trace objectives use
/// `||J||_* + lambda ||E||_l`.
pub fn solve_lrr_baseline(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    run_alm(x, cfg, Method::Lrr)
}
