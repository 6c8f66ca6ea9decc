//! Normalized-cuts spectral clustering of an affinity matrix.
//!
//! The pipeline is the symmetric normalized variant: form
//! `L = I - D^{-1/2} W D^{-1/2}` from the degree matrix `D`, embed samples
//! as rows of the `k` eigenvectors with smallest eigenvalues, normalize the
//! rows, and run best-of-restarts k-means++ on them. Isolated vertices
//! (zero degree) get a zero `D^{-1/2}` entry, keeping `L` well-defined;
//! they land wherever k-means puts the zero row and are flagged.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::ClusterLabels;

/// Spectral clustering controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralConfig {
    /// Number of clusters, `1 <= k <= n`.
    pub k: usize,
    /// Seed for the k-means stage; restart `r` uses stream `r` of the seed.
    pub seed: u64,
    /// k-means restarts (best inertia wins).
    pub restarts: usize,
    /// Lloyd iteration cap per restart.
    pub kmeans_max_iters: usize,
}

impl SpectralConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        SpectralConfig {
            k,
            seed,
            restarts: 20,
            kmeans_max_iters: 300,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be >= 1".into()));
        }
        if self.kmeans_max_iters == 0 {
            return Err(Error::Config("kmeans_max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_affinity(w: &DMatrix<f64>) -> Result<()> {
    if w.nrows() != w.ncols() {
        return Err(Error::Dimension(format!(
            "affinity matrix must be square, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    for i in 0..w.nrows() {
        for j in i..w.ncols() {
            let (a, b) = (w[(i, j)], w[(j, i)]);
            if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
                return Err(Error::Numerical(
                    "affinity entries must be finite and non-negative".into(),
                ));
            }
            if (a - b).abs() > 1e-8 * (1.0 + a.abs()) {
                return Err(Error::Numerical(format!(
                    "affinity matrix not symmetric at ({i},{j}): {a} vs {b}"
                )));
            }
        }
    }
    Ok(())
}

/// Symmetric normalized Laplacian `L = I - D^{-1/2} W D^{-1/2}` with zero
/// `D^{-1/2}` entries for isolated (zero-degree) vertices.
pub fn normalized_laplacian(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_affinity(w)?;
    let n = w.nrows();
    let d_inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let deg: f64 = w.row(i).iter().sum();
            if deg > 0.0 {
                1.0 / deg.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = -d_inv_sqrt[i] * w[(i, j)] * d_inv_sqrt[j];
        }
        l[(i, i)] += 1.0;
    }
    // Exact symmetry despite rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (l[(i, j)] + l[(j, i)]);
            l[(i, j)] = avg;
            l[(j, i)] = avg;
        }
    }
    Ok(l)
}

/// The `k` smallest eigenpairs of the normalized Laplacian, eigenvalues
/// ascending, eigenvectors as columns.
pub fn laplacian_eigens(w: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = w.nrows();
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let l = normalized_laplacian(w)?;
    let eigen = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[a]
            .partial_cmp(&eigen.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().take(k).map(|&i| eigen.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, k);
    for (c, &i) in order.iter().take(k).enumerate() {
        vectors.set_column(c, &eigen.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Spectral embedding: rows of the `k` smallest Laplacian eigenvectors,
/// normalized to unit length (all-zero rows are left as zero).
pub fn spectral_embed(w: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let (_, mut vectors) = laplacian_eigens(w, k)?;
    for i in 0..vectors.nrows() {
        let norm = vectors.row(i).norm();
        if norm > 1e-12 {
            vectors.row_mut(i).scale_mut(1.0 / norm);
        }
    }
    Ok(vectors)
}

/// k-means output; `degenerate` flags empty clusters or coincident centers
/// (fewer distinct points than `k`).
#[derive(Debug, Clone)]
pub struct KmeansOutcome {
    pub labels: ClusterLabels,
    /// Within-cluster sum of squared distances of the winning restart.
    pub inertia: f64,
    pub degenerate: bool,
}

fn squared_dist(points: &DMatrix<f64>, i: usize, b: &nalgebra::RowDVector<f64>) -> f64 {
    let mut acc = 0.0;
    for c in 0..points.ncols() {
        let d = points[(i, c)] - b[c];
        acc += d * d;
    }
    acc
}

/// Weighted index draw; falls back to uniform when all weights vanish.
fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return rng.random_range(0..weights.len());
    }
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

struct LloydRun {
    assignments: Vec<usize>,
    inertia: f64,
    degenerate: bool,
}

fn lloyd_once(
    points: &DMatrix<f64>,
    k: usize,
    max_iters: usize,
    rng: &mut ChaCha8Rng,
) -> LloydRun {
    let n = points.nrows();
    let dim = points.ncols();

    // k-means++ seeding.
    let mut centers: Vec<nalgebra::RowDVector<f64>> = Vec::with_capacity(k);
    centers.push(points.row(rng.random_range(0..n)).into_owned());
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_dist(points, i, &centers[0]))
        .collect();
    while centers.len() < k {
        let idx = pick_weighted(rng, &nearest);
        let c = points.row(idx).into_owned();
        for (i, near) in nearest.iter_mut().enumerate() {
            *near = near.min(squared_dist(points, i, &c));
        }
        centers.push(c);
    }

    let mut assignments = vec![0usize; n];
    for _ in 0..max_iters {
        // Assign: nearest center, ties to the lowest index.
        let mut changed = false;
        for i in 0..n {
            let mut best = (f64::INFINITY, 0usize);
            for (c, center) in centers.iter().enumerate() {
                let d = squared_dist(points, i, center);
                if d < best.0 {
                    best = (d, c);
                }
            }
            if assignments[i] != best.1 {
                assignments[i] = best.1;
                changed = true;
            }
        }

        // Update: mean per cluster; empty clusters take the point farthest
        // from its current center.
        let mut counts = vec![0usize; k];
        let mut sums = vec![nalgebra::RowDVector::<f64>::zeros(dim); k];
        for i in 0..n {
            counts[assignments[i]] += 1;
            sums[assignments[i]] += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = &sums[c] / counts[c] as f64;
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        squared_dist(points, a, &centers[assignments[a]])
                            .partial_cmp(&squared_dist(points, b, &centers[assignments[b]]))
                            .unwrap()
                            .then(b.cmp(&a))
                    })
                    .unwrap();
                centers[c] = points.row(far).into_owned();
                assignments[far] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let inertia: f64 = (0..n)
        .map(|i| squared_dist(points, i, &centers[assignments[i]]))
        .sum();
    let mut counts = vec![0usize; k];
    for &a in &assignments {
        counts[a] += 1;
    }
    let empty = counts.iter().any(|&c| c == 0);
    let coincident = (0..k).any(|a| {
        ((a + 1)..k).any(|b| (&centers[a] - &centers[b]).norm_squared() <= 1e-24)
    });
    LloydRun {
        assignments,
        inertia,
        degenerate: empty || coincident,
    }
}

/// Best-of-restarts Lloyd's algorithm with k-means++ seeding on the rows of
/// `points`. Deterministic given `cfg.seed`; restart `r` draws from stream
/// `r` of a counter-based generator seeded with `cfg.seed`.
pub fn kmeans(points: &DMatrix<f64>, cfg: &SpectralConfig) -> Result<KmeansOutcome> {
    cfg.validate()?;
    let n = points.nrows();
    if n < cfg.k {
        return Err(Error::Config(format!(
            "need at least k={} points, got {n}",
            cfg.k
        )));
    }
    let mut best: Option<LloydRun> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64 + 1);
        let run = lloyd_once(points, cfg.k, cfg.kmeans_max_iters, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(KmeansOutcome {
        labels: ClusterLabels::new(best.assignments, cfg.k)?,
        inertia: best.inertia,
        degenerate: best.degenerate,
    })
}

/// Normalized-cuts result with degeneracy diagnostics.
#[derive(Debug, Clone)]
pub struct NcutsOutcome {
    pub labels: ClusterLabels,
    /// Zero-degree vertices in the affinity graph.
    pub isolated: usize,
    pub degenerate: bool,
}

/// Normalized cuts: spectral embedding followed by k-means.
pub fn ncuts(w: &DMatrix<f64>, cfg: &SpectralConfig) -> Result<NcutsOutcome> {
    cfg.validate()?;
    let embedding = spectral_embed(w, cfg.k)?;
    let isolated = (0..w.nrows())
        .filter(|&i| w.row(i).iter().sum::<f64>() <= 0.0)
        .count();
    if isolated > 0 {
        log::warn!("{isolated} isolated vertices: assignments for them are arbitrary");
    }
    let km = kmeans(&embedding, cfg)?;
    Ok(NcutsOutcome {
        labels: km.labels,
        isolated,
        degenerate: km.degenerate || isolated > 0,
    })
}
