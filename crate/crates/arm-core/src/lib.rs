//! Robust subspace clustering via arctangent rank minimization.
//!
//! The library recovers a low-rank self-expressive representation `Z` of a
//! data matrix `X` (columns are samples drawn from a union of low-dimensional
//! subspaces) by solving
//!
//! ```text
//! min_{Z,E}  sum_i arctan(sigma_i(Z)) + lambda * ||E||   s.t.  X = X Z + E
//! ```
//!
//! with an augmented-Lagrangian scheme whose inner step evaluates the
//! arctangent spectral proximal operator in closed form over singular values.
//! The representation is then sharpened into an affinity graph and segmented
//! with normalized cuts.
//!
//! Pipeline entry points:
//! - [`solver::solve_arm`] / [`solver::solve_lrr_baseline`] for the
//!   representation alone,
//! - [`subspace_cluster`] for the full matrix-to-labels pipeline,
//! - [`eval`] for synthetic data, corruption models, and scoring.
//!
//! All randomness flows through explicit seeds; repeated runs are
//! bit-identical.

pub mod affinity;
pub mod cli;
pub mod error;
pub mod eval;
pub mod io;
pub mod manifest;
pub mod prox;
pub mod solver;
pub mod spectral;
pub mod svd;

pub use error::{Error, Result};
pub use eval::clustering_error;
pub use io::{load_matrix, save_matrix, ClusterLabels, DataMatrix, MatrixFormat};
pub use solver::{solve_arm, solve_lrr_baseline, ErrorModel, SolveResult, SolverConfig};
pub use spectral::{ncuts, NcutsOutcome, SpectralConfig};

use nalgebra::DMatrix;

/// Result of the full matrix-to-labels pipeline.
pub struct PipelineOutcome {
    /// Solver output (representation, residual, trace).
    pub solve: SolveResult,
    /// Affinity matrix fed to normalized cuts.
    pub affinity: DMatrix<f64>,
    /// Cluster assignment per column of the input.
    pub labels: ClusterLabels,
    /// Vertices with no affinity mass (assigned arbitrarily).
    pub isolated: usize,
    /// True when every k-means restart collapsed; labels are still valid
    /// but came from a degenerate embedding.
    pub degenerate: bool,
}

/// Turns a representation matrix into an affinity graph and cluster labels.
pub fn cluster_from_representation(
    z: &DMatrix<f64>,
    alpha: u32,
    svd_rel_tol: f64,
    spectral: &SpectralConfig,
) -> Result<(DMatrix<f64>, NcutsOutcome)> {
    let graph = affinity::build_affinity(z, alpha, svd_rel_tol)?;
    let w = graph.into_matrix();
    let outcome = ncuts(&w, spectral)?;
    Ok((w, outcome))
}

/// Full pipeline: solve for the representation of `x`, build the affinity
/// graph, and segment it into `spectral.k` clusters.
pub fn subspace_cluster(
    x: &DMatrix<f64>,
    solver: &SolverConfig,
    alpha: u32,
    svd_rel_tol: f64,
    spectral: &SpectralConfig,
) -> Result<PipelineOutcome> {
    let solve = solve_arm(x, solver)?;
    let (affinity, out) = cluster_from_representation(&solve.z, alpha, svd_rel_tol, spectral)?;
    Ok(PipelineOutcome {
        solve,
        affinity,
        labels: out.labels,
        isolated: out.isolated,
        degenerate: out.degenerate,
    })
}
