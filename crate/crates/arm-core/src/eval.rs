//! Synthetic ground truth, corruption models, and evaluation metrics.
//!
//! Data is drawn from a union of `k` linear subspaces: each subspace gets an
//! orthonormal basis, each sample is that basis times a unit-norm Gaussian
//! coefficient vector, and the assembled columns are shuffled (labels track
//! the shuffle). Corruption is applied separately so tests can compare
//! against the exact planted error matrix.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::ClusterLabels;
use crate::prox::arctan_rank;

/// How subspace bases relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceMode {
    /// Disjoint column blocks of one random orthogonal matrix: pairwise
    /// orthogonal, mutually independent subspaces. Requires `sum d_i <= m`.
    Independent,
    /// Each basis drawn separately; subspaces may overlap and `sum d_i`
    /// may exceed the ambient dimension.
    Dependent,
}

impl std::str::FromStr for SubspaceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "independent" => Ok(SubspaceMode::Independent),
            "dependent" => Ok(SubspaceMode::Dependent),
            other => Err(Error::Config(format!(
                "unknown subspace mode {other:?} (expected \"independent\" or \"dependent\")"
            ))),
        }
    }
}

/// Generator parameters for a union of subspaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceSpec {
    /// Ambient dimension `m`.
    pub ambient_dim: usize,
    /// Intrinsic dimension per subspace.
    pub dims: Vec<usize>,
    /// Samples per subspace.
    pub points_per_subspace: Vec<usize>,
    pub seed: u64,
    pub mode: SubspaceMode,
}

impl SubspaceSpec {
    /// `k` subspaces sharing one intrinsic dimension and point count.
    pub fn uniform(
        ambient_dim: usize,
        k: usize,
        dim: usize,
        points: usize,
        seed: u64,
        mode: SubspaceMode,
    ) -> Self {
        SubspaceSpec {
            ambient_dim,
            dims: vec![dim; k],
            points_per_subspace: vec![points; k],
            seed,
            mode,
        }
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    pub fn total_points(&self) -> usize {
        self.points_per_subspace.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::Config("need at least one subspace".into()));
        }
        if self.dims.len() != self.points_per_subspace.len() {
            return Err(Error::Config(
                "dims and points_per_subspace must have equal length".into(),
            ));
        }
        if self.ambient_dim == 0 {
            return Err(Error::Config("ambient_dim must be >= 1".into()));
        }
        if self.dims.iter().any(|&d| d == 0 || d > self.ambient_dim) {
            return Err(Error::Config("each d_i must satisfy 1 <= d_i <= m".into()));
        }
        if self.points_per_subspace.iter().any(|&p| p == 0) {
            return Err(Error::Config("each subspace needs at least one point".into()));
        }
        if self.mode == SubspaceMode::Independent
            && self.dims.iter().sum::<usize>() > self.ambient_dim
        {
            return Err(Error::Config(format!(
                "independent mode requires sum(d_i) <= m, got {} > {}",
                self.dims.iter().sum::<usize>(),
                self.ambient_dim
            )));
        }
        Ok(())
    }
}

fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Samples a union of subspaces; deterministic per seed. Columns are
/// shuffled, with labels recording the subspace of each column.
pub fn generate_subspaces(spec: &SubspaceSpec) -> Result<(DMatrix<f64>, ClusterLabels)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.ambient_dim;
    let k = spec.k();
    let n = spec.total_points();

    // Per-subspace orthonormal bases.
    let bases: Vec<DMatrix<f64>> = match spec.mode {
        SubspaceMode::Independent => {
            let q = standard_normal_matrix(m, m, &mut rng).qr().q();
            let mut offset = 0;
            spec.dims
                .iter()
                .map(|&d| {
                    let b = q.columns(offset, d).into_owned();
                    offset += d;
                    b
                })
                .collect()
        }
        SubspaceMode::Dependent => spec
            .dims
            .iter()
            .map(|&d| {
                let g = standard_normal_matrix(m, d, &mut rng);
                g.qr().q().columns(0, d).into_owned()
            })
            .collect(),
    };

    let mut columns = DMatrix::zeros(m, n);
    let mut flat_labels = Vec::with_capacity(n);
    let mut col = 0;
    for s in 0..k {
        for _ in 0..spec.points_per_subspace[s] {
            let mut coeff = DVector::from_fn(spec.dims[s], |_, _| {
                rng.sample::<f64, _>(StandardNormal)
            });
            let norm = coeff.norm();
            if norm > 0.0 {
                coeff /= norm;
            } else {
                coeff[0] = 1.0;
            }
            columns.set_column(col, &(&bases[s] * coeff));
            flat_labels.push(s);
            col += 1;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut x = DMatrix::zeros(m, n);
    let mut labels = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        x.set_column(dst, &columns.column(src));
        labels.push(flat_labels[src]);
    }
    Ok((x, ClusterLabels::new(labels, k)?))
}

/// The three planted error models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionModel {
    /// Additive `N(0, level^2)` on every entry.
    Gaussian,
    /// `floor(level * m * n)` uniformly chosen entries replaced by
    /// `uniform[-magnitude, magnitude]`.
    Sparse,
    /// `floor(level * n)` uniformly chosen columns replaced by Gaussian
    /// vectors of norm `magnitude`.
    SampleSpecific,
}

impl std::str::FromStr for CorruptionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(CorruptionModel::Gaussian),
            "sparse" => Ok(CorruptionModel::Sparse),
            "sample" | "sample_specific" | "sample-specific" => Ok(CorruptionModel::SampleSpecific),
            other => Err(Error::Config(format!(
                "unknown corruption model {other:?} (expected \"gaussian\", \"sparse\", or \"sample\")"
            ))),
        }
    }
}

/// Corruption parameters. `level` is a std-dev (gaussian), a fraction of
/// entries (sparse), or a fraction of columns (sample_specific).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub model: CorruptionModel,
    pub level: f64,
    pub magnitude: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.level >= 0.0) || !self.level.is_finite() {
            return Err(Error::Config(format!("level must be >= 0, got {}", self.level)));
        }
        if self.model != CorruptionModel::Gaussian && self.level > 1.0 {
            return Err(Error::Config(format!(
                "level is a fraction in [0,1] for this model, got {}",
                self.level
            )));
        }
        if !(self.magnitude >= 0.0) || !self.magnitude.is_finite() {
            return Err(Error::Config(format!(
                "magnitude must be >= 0, got {}",
                self.magnitude
            )));
        }
        Ok(())
    }
}

/// Applies the corruption model, returning `(X_corrupted, E_true)`.
/// For the replacement models (sparse, sample_specific),
/// `X_corrupted - X == E_true` holds bitwise.
pub fn corrupt(x: &DMatrix<f64>, spec: &CorruptionSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    spec.validate()?;
    let (m, n) = x.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x_corr = x.clone();
    let mut e_true = DMatrix::zeros(m, n);

    match spec.model {
        CorruptionModel::Gaussian => {
            if spec.level > 0.0 {
                for i in 0..m {
                    for j in 0..n {
                        let noise = spec.level * rng.sample::<f64, _>(StandardNormal);
                        e_true[(i, j)] = noise;
                        x_corr[(i, j)] += noise;
                    }
                }
            }
        }
        CorruptionModel::Sparse => {
            let count = (spec.level * (m * n) as f64).floor() as usize;
            let mut cells: Vec<usize> = (0..m * n).collect();
            cells.shuffle(&mut rng);
            for &cell in cells.iter().take(count) {
                let (i, j) = (cell % m, cell / m);
                let new = rng.random_range(-spec.magnitude..=spec.magnitude);
                e_true[(i, j)] = new - x[(i, j)];
                x_corr[(i, j)] = new;
            }
        }
        CorruptionModel::SampleSpecific => {
            let count = (spec.level * n as f64).floor() as usize;
            let mut cols: Vec<usize> = (0..n).collect();
            cols.shuffle(&mut rng);
            for &j in cols.iter().take(count) {
                let mut v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = v.norm();
                if norm > 0.0 {
                    v *= spec.magnitude / norm;
                }
                for i in 0..m {
                    e_true[(i, j)] = v[i] - x[(i, j)];
                    x_corr[(i, j)] = v[i];
                }
            }
        }
    }
    Ok((x_corr, e_true))
}

/// Maximum-weight perfect matching on a square non-negative matrix
/// (Hungarian algorithm via shortest augmenting paths, O(n^3)).
fn hungarian_max(weights: &[Vec<usize>]) -> usize {
    let n = weights.len();
    if n == 0 {
        return 0;
    }
    let maxw = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    // Minimize cost = maxw - weight over a perfect matching.
    let cost = |i: usize, j: usize| maxw - weights[i][j] as i64;
    const INF: i64 = i64::MAX / 4;

    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j (1-based)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| weights[p[j] - 1][j - 1]).sum()
}

/// Misclassification rate under the best label bijection:
/// `1 - (optimally matched count) / n`.
pub fn clustering_error(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "label lengths differ: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    let n = pred.len();
    if n == 0 {
        return Ok(0.0);
    }
    let k = pred.k().max(truth.k());
    let mut contingency = vec![vec![0usize; k]; k];
    for (&a, &b) in pred.as_slice().iter().zip(truth.as_slice()) {
        contingency[a][b] += 1;
    }
    let matched = hungarian_max(&contingency);
    Ok(1.0 - matched as f64 / n as f64)
}

/// Fraction of off-diagonal affinity mass that falls within ground-truth
/// clusters. An empty off-diagonal (0/0) counts as 1.
pub fn block_diag_mass(w: &DMatrix<f64>, truth: &ClusterLabels) -> Result<f64> {
    if w.nrows() != w.ncols() || w.nrows() != truth.len() {
        return Err(Error::Dimension(format!(
            "affinity {}x{} incompatible with {} labels",
            w.nrows(),
            w.ncols(),
            truth.len()
        )));
    }
    let n = truth.len();
    let labels = truth.as_slice();
    let mut within = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            total += w[(i, j)];
            if labels[i] == labels[j] {
                within += w[(i, j)];
            }
        }
    }
    Ok(if total == 0.0 { 1.0 } else { within / total })
}

/// One grid point of the rank-surrogate comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankProfileRow {
    pub sigma1: f64,
    pub sigma2: f64,
    /// Number of nonzero singular values.
    pub rank: u32,
    /// `(2/pi) * sum arctan(sigma_i)`.
    pub arctan_scaled: f64,
    /// `sum sigma_i`.
    pub nuclear: f64,
}

/// Tabulates rank, the scaled arctangent surrogate, and the nuclear norm
/// over the grid `(sigma1, sigma2) in [0, sigma_max]^2` with `steps` points
/// per axis.
pub fn rank_approx_profile(sigma_max: f64, steps: usize) -> Result<Vec<RankProfileRow>> {
    if !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(Error::Config(format!("sigma_max must be positive, got {sigma_max}")));
    }
    if steps < 2 {
        return Err(Error::Config(format!("steps must be >= 2, got {steps}")));
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| sigma_max * i as f64 / (steps - 1) as f64)
        .collect();
    let mut rows = Vec::with_capacity(steps * steps);
    for &s1 in &grid {
        for &s2 in &grid {
            let spectrum = [s1, s2];
            rows.push(RankProfileRow {
                sigma1: s1,
                sigma2: s2,
                rank: spectrum.iter().filter(|&&s| s > 0.0).count() as u32,
                arctan_scaled: arctan_rank(&spectrum) * std::f64::consts::FRAC_2_PI,
                nuclear: s1 + s2,
            });
        }
    }
    Ok(rows)
}
