//! Angular affinity graph from a learned representation.
//!
//! Given the solver output `Z*`, take the skinny SVD `Z* = U S V^T`, scale
//! the left factor to `U~ = U S^{1/2}`, and compare samples by the angle
//! between the ROWS of `U~` (row `i` is sample `i`'s spectral embedding):
//!
//! ```text
//! W_ij = ( u~_i . u~_j / (||u~_i|| ||u~_j||) )^(2 alpha)
//! ```
//!
//! The even exponent keeps entries in `[0, 1]`; larger `alpha` sharpens the
//! contrast between aligned and oblique pairs. Rows of `U~` that are exactly
//! zero have no defined angle; their affinities (including the diagonal) are
//! set to 0, leaving the sample an isolated vertex.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default sharpening exponent.
pub const DEFAULT_ALPHA: u32 = 2;

/// Default relative singular-value cutoff for the skinny SVD. The solver
/// drives trailing singular values near but not exactly to zero, so the cut
/// is relative to `sigma_1`.
pub const DEFAULT_SVD_REL_TOL: f64 = 1e-6;

/// Rank-truncated SVD factors, `sigma_i > rel_tol * sigma_1` retained.
#[derive(Debug, Clone)]
pub struct SkinnySvd {
    /// `n x r` left singular vectors.
    pub u: DMatrix<f64>,
    /// Retained singular values, non-increasing, length `r`.
    pub sigma: DVector<f64>,
    /// `n x r` right singular vectors.
    pub v: DMatrix<f64>,
}

impl SkinnySvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }
}

/// Thin SVD of `z` keeping components with `sigma_i > rel_tol * sigma_1`.
/// A zero matrix yields rank 0 (empty factors).
pub fn skinny_svd(z: &DMatrix<f64>, rel_tol: f64) -> Result<SkinnySvd> {
    if !(rel_tol >= 0.0) || !rel_tol.is_finite() {
        return Err(Error::Config(format!("svd rel_tol must be >= 0, got {rel_tol}")));
    }
    let svd = crate::svd::thin_svd(z)?;
    if svd.sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("SVD produced non-finite values".into()));
    }
    let sigma1 = svd.sigma.max();
    let cut = rel_tol * sigma1;
    let rank = svd.sigma.iter().take_while(|&&s| s > cut && s > 0.0).count();
    Ok(SkinnySvd {
        u: svd.u.columns(0, rank).into_owned(),
        sigma: DVector::from_iterator(rank, svd.sigma.iter().take(rank).copied()),
        v: svd.vt.rows(0, rank).transpose(),
    })
}

/// Symmetric affinity matrix with entries in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct AffinityGraph {
    w: DMatrix<f64>,
    alpha: u32,
}

impl AffinityGraph {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.w
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// Number of samples (vertices).
    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.nrows() == 0
    }
}

/// Builds the angular affinity graph from `z_star`.
///
/// `alpha` must be a positive integer. Zero rows of `U~` produce all-zero
/// affinity rows (isolated vertices) and a warning; diagonal entries of
/// nonzero rows are exactly 1 and the matrix is exactly symmetric.
pub fn build_affinity(z_star: &DMatrix<f64>, alpha: u32, rel_tol: f64) -> Result<AffinityGraph> {
    if alpha == 0 {
        return Err(Error::Config("alpha must be a positive integer".into()));
    }
    if z_star.nrows() != z_star.ncols() {
        return Err(Error::Dimension(format!(
            "representation must be square, got {}x{}",
            z_star.nrows(),
            z_star.ncols()
        )));
    }
    let n = z_star.nrows();
    let svd = skinny_svd(z_star, rel_tol)?;
    if svd.rank() == 0 {
        log::warn!("all-zero representation: affinity graph has no edges");
        return Ok(AffinityGraph {
            w: DMatrix::zeros(n, n),
            alpha,
        });
    }

    // U~ = U S^{1/2}; row i is sample i's embedding.
    let mut u_tilde = svd.u.clone();
    for (c, s) in svd.sigma.iter().enumerate() {
        let scale = s.sqrt();
        u_tilde.column_mut(c).scale_mut(scale);
    }
    let row_norms: Vec<f64> = (0..n).map(|i| u_tilde.row(i).norm()).collect();
    if row_norms.iter().any(|&r| r == 0.0) {
        log::warn!("zero embedding rows found: corresponding samples become isolated vertices");
    }

    let exponent = 2 * alpha as i32;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        if row_norms[i] == 0.0 {
            continue;
        }
        w[(i, i)] = 1.0;
        for jj in (i + 1)..n {
            if row_norms[jj] == 0.0 {
                continue;
            }
            let cos = (u_tilde.row(i).dot(&u_tilde.row(jj)) / (row_norms[i] * row_norms[jj]))
                .clamp(-1.0, 1.0);
            let val = cos.powi(exponent);
            w[(i, jj)] = val;
            w[(jj, i)] = val;
        }
    }
    Ok(AffinityGraph { w, alpha })
}
