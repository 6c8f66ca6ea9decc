//! Dense SVD helpers exposed in nalgebra types.
//!
//! Every spectral step in the library routes through [`thin_svd`]. The
//! factorization itself is delegated to faer's divide-and-conquer kernel:
//! the iterative bidiagonal solver that ships with nalgebra loses several
//! digits on exactly rank-deficient inputs, which is the common case here
//! (representations of union-of-subspace data are low rank by design).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin singular value decomposition `a = u * diag(sigma) * vt` with
/// `sigma` sorted in descending order.
pub struct ThinSvd {
    /// Left singular vectors, `m x min(m, n)`.
    pub u: DMatrix<f64>,
    /// Singular values, descending.
    pub sigma: DVector<f64>,
    /// Transposed right singular vectors, `min(m, n) x n`.
    pub vt: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Computes the thin SVD of `a`. Errors only if the factorization fails to
/// converge, which faer reserves for pathological inputs.
pub fn thin_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    let svd = faer::linalg::solvers::Svd::new_thin(to_faer(a).as_ref())
        .map_err(|_| Error::Numerical("SVD did not converge".into()))?;
    let size = a.nrows().min(a.ncols());
    let u = DMatrix::from_fn(a.nrows(), size, |i, j| svd.U()[(i, j)]);
    let vt = DMatrix::from_fn(size, a.ncols(), |i, j| svd.V()[(j, i)]);
    let sigma = DVector::from_fn(size, |i, _| svd.S()[i]);
    debug_assert!(sigma.iter().zip(sigma.iter().skip(1)).all(|(a, b)| a >= b));
    Ok(ThinSvd { u, sigma, vt })
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(thin_svd(a)?.sigma)
}

impl ThinSvd {
    /// Rebuilds `u * diag(sigma) * vt`, optionally with a replacement
    /// spectrum of the same length.
    pub fn reassemble(&self, sigma: &[f64]) -> DMatrix<f64> {
        assert_eq!(sigma.len(), self.sigma.len());
        let scaled = DMatrix::from_fn(self.u.nrows(), sigma.len(), |i, j| {
            self.u[(i, j)] * sigma[j]
        });
        &scaled * &self.vt
    }
}
