//! Shared oracles for the integration suites. Everything here recomputes
//! quantities from first principles (plane rotations, finite differences,
//! exhaustive search) so the library code under test is never trusted to
//! check itself.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Singular values of a 3x3 matrix by one-sided Jacobi: plane rotations
/// orthogonalize the columns pairwise and the singular values are read off
/// as the resulting column norms. Unlike the trigonometric closed form for
/// the eigenvalues of `A^T A`, Jacobi keeps high relative accuracy on
/// (near-)rank-deficient input, where forming the Gram matrix loses the
/// small eigenvalues to cancellation. Shares no code with the library SVD.
pub fn singular_values_3x3(a: &DMatrix<f64>) -> [f64; 3] {
    assert_eq!(a.shape(), (3, 3));
    let mut m = a.clone();
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..2 {
            for q in (p + 1)..3 {
                let (app, aqq, apq) = {
                    let cp = m.column(p);
                    let cq = m.column(q);
                    (cp.dot(&cp), cq.dot(&cq), cp.dot(&cq))
                };
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..3 {
                    let vp = m[(r, p)];
                    let vq = m[(r, q)];
                    m[(r, p)] = c * vp - s * vq;
                    m[(r, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [m.column(0).norm(), m.column(1).norm(), m.column(2).norm()];
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// `sum_i arctan(sigma_i(Z)) + (mu/2) ||Z - A||_F^2` for 3x3 arguments.
pub fn prox_objective_3x3(z: &DMatrix<f64>, a: &DMatrix<f64>, mu: f64) -> f64 {
    let f: f64 = singular_values_3x3(z).iter().map(|s| s.atan()).sum();
    f + 0.5 * mu * (z - a).norm_squared()
}

/// Gradient-descent oracle for the matrix prox objective: multi-start
/// descent with finite-difference gradients and backtracking. Returns the
/// best objective value found. `extra_start` lets the caller seed the
/// search with a candidate whose optimality is being questioned.
pub fn prox_oracle_3x3(a: &DMatrix<f64>, mu: f64, extra_start: &DMatrix<f64>, seed: u64) -> f64 {
    prox_oracle_3x3_point(a, mu, extra_start, seed).0
}

/// Like [`prox_oracle_3x3`] but also returns the minimizing point.
pub fn prox_oracle_3x3_point(
    a: &DMatrix<f64>,
    mu: f64,
    extra_start: &DMatrix<f64>,
    seed: u64,
) -> (f64, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![
        a.clone(),
        DMatrix::zeros(3, 3),
        a * 0.5,
        extra_start.clone(),
    ];
    for _ in 0..3 {
        starts.push(DMatrix::from_fn(3, 3, |_, _| {
            rng.sample::<f64, _>(StandardNormal)
        }));
    }

    let mut best = (f64::INFINITY, DMatrix::zeros(3, 3));
    for start in starts {
        let mut z = start;
        let mut obj = prox_objective_3x3(&z, a, mu);
        let h = 1e-6;
        for _ in 0..400 {
            let mut grad = DMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let mut plus = z.clone();
                    let mut minus = z.clone();
                    plus[(i, j)] += h;
                    minus[(i, j)] -= h;
                    grad[(i, j)] = (prox_objective_3x3(&plus, a, mu)
                        - prox_objective_3x3(&minus, a, mu))
                        / (2.0 * h);
                }
            }
            let gnorm = grad.norm();
            if gnorm <= 1e-9 {
                break;
            }
            // Backtracking line search on the descent direction.
            let mut step = 1.0 / mu.max(1.0);
            let mut moved = false;
            for _ in 0..40 {
                let cand = &z - step * &grad;
                let cand_obj = prox_objective_3x3(&cand, a, mu);
                if cand_obj < obj - 1e-12 {
                    z = cand;
                    obj = cand_obj;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if obj < best.0 {
            best = (obj, z);
        }
    }
    best
}

/// Deterministic standard-normal matrix.
pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Minimum over all label permutations of the mismatch fraction; feasible
/// for k <= 4. Independent of the Hungarian implementation under test.
pub fn brute_force_error(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for tail in permutations(k - 1) {
            for pos in 0..k {
                let mut p = tail.clone();
                p.insert(pos, k - 1);
                out.push(p);
            }
        }
        out
    }
    assert_eq!(pred.len(), truth.len());
    let n = pred.len();
    let mut best = usize::MAX;
    for perm in permutations(k) {
        let mismatches = (0..n).filter(|&i| perm[pred[i]] != truth[i]).count();
        best = best.min(mismatches);
    }
    best as f64 / n as f64
}
