//! Orthogonal matching pursuit and K-SVD dictionary learning.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Mat};
use crate::rng::Seed;

/// Greedy sparse code of `y` in the unit-norm columns of `d`: at most
/// `sparsity` atoms, stopping early once `‖y − Dx‖ ≤ tol`.
pub fn omp(d: &Mat, y: &[f64], sparsity: usize, tol: f64) -> Vec<f64> {
    assert_eq!(y.len(), d.rows(), "signal length must match dictionary rows");
    let dt = d.transpose();
    omp_with_transpose(&dt, y, sparsity, tol)
}

/// OMP against a dictionary given by its transpose (atoms as rows).
fn omp_with_transpose(dt: &Mat, y: &[f64], sparsity: usize, tol: f64) -> Vec<f64> {
    let (n, m) = dt.shape();
    let mut x = vec![0.0; n];
    let mut residual = y.to_vec();
    // Orthonormal basis of the selected atoms (Gram–Schmidt, reorthogonalized).
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut support: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    let max_atoms = sparsity.min(m).min(n);
    while support.len() < max_atoms && norm2(&residual) > tol {
        let mut best = None;
        let mut best_val = 0.0;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let c = dot(dt.row(j), &residual).abs();
            if c > best_val {
                best_val = c;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        let atom = dt.row(j);
        let mut v = atom.to_vec();
        let mut coeffs = vec![0.0; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let c = dot(qk, &v);
                coeffs[k] += c;
                v.iter_mut().zip(qk).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let nv = norm2(&v);
        used[j] = true;
        if nv <= 1e-12 * norm2(atom).max(f64::MIN_POSITIVE) {
            // Linearly dependent on the current support: skip it.
            continue;
        }
        v.iter_mut().for_each(|vi| *vi /= nv);
        coeffs.push(nv);
        let proj = dot(&v, &residual);
        residual.iter_mut().zip(&v).for_each(|(ri, vi)| *ri -= proj * vi);
        q.push(v);
        r_cols.push(coeffs);
        support.push(j);
    }
    if support.is_empty() {
        return x;
    }
    // Solve R·c = Qᵀy by back substitution (R upper triangular, column-stored).
    let k = support.len();
    let qty: Vec<f64> = q.iter().map(|qk| dot(qk, y)).collect();
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for j in (i + 1)..k {
            s -= r_cols[j][i] * c[j];
        }
        c[i] = s / r_cols[i][i];
    }
    for (&j, v) in support.iter().zip(&c) {
        x[j] = *v;
    }
    x
}

#[derive(Clone, Debug)]
pub struct KsvdConfig {
    pub atoms: usize,
    pub sparsity: usize,
    pub iters: usize,
    /// Stop once the mean squared per-entry representation error falls to
    /// this value; also used as each patch's OMP residual goal.
    pub error_goal: f64,
    pub seed: Seed,
}

#[derive(Clone, Debug)]
pub struct KsvdResult {
    pub dictionary: Mat,
    /// Mean squared per-entry error after each iteration.
    pub errors: Vec<f64>,
    pub replaced_atoms: usize,
}

fn mean_error(y: &Mat, d: &Mat, codes: &[Vec<(usize, f64)>]) -> f64 {
    let total: f64 = (0..y.cols())
        .map(|j| patch_error(y, d, &codes[j], j))
        .sum();
    total / (y.rows() * y.cols()).max(1) as f64
}

fn patch_error(y: &Mat, d: &Mat, code: &[(usize, f64)], j: usize) -> f64 {
    let mut r = y.col(j);
    for &(k, v) in code {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= d[(i, k)] * v;
        }
    }
    dot(&r, &r)
}

/// Learns `atoms` unit-norm atoms from the columns of `signals`.
///
/// Initialization draws distinct signals (normalized; zero signals replaced
/// by Gaussian vectors). Each iteration codes every signal with OMP, keeping
/// the previous code when OMP does worse, then updates each atom and its
/// coefficients by a rank-one fit of the residual restricted to the signals
/// that use it. Unused atoms are replaced by the worst-represented signal.
pub fn ksvd_learn(signals: &Mat, cfg: &KsvdConfig) -> Result<KsvdResult> {
    let (dim, count) = signals.shape();
    if count == 0 || dim == 0 {
        return Err(Error::Input("empty training set".into()));
    }
    if cfg.atoms == 0 || cfg.atoms > count {
        return Err(Error::Input(format!(
            "cannot learn {} atoms from {count} signals",
            cfg.atoms
        )));
    }
    if cfg.sparsity == 0 {
        return Err(Error::Input("sparsity must be at least 1".into()));
    }
    let mut stream = cfg.seed.stream(0);
    let picks = stream.sample_indices(count, cfg.atoms);
    let mut d = Mat::zeros(dim, cfg.atoms);
    for (k, &p) in picks.iter().enumerate() {
        let mut col = signals.col(p);
        if norm2(&col) == 0.0 {
            col = (0..dim).map(|_| stream.normal()).collect();
        }
        let n = norm2(&col);
        d.set_col(k, &col.iter().map(|v| v / n).collect::<Vec<_>>());
    }
    let mut errors = Vec::new();
    let mut replaced = 0;
    let mut codes: Vec<Vec<(usize, f64)>> = vec![Vec::new(); count];
    let omp_tol = (cfg.error_goal * dim as f64).sqrt();

    for _ in 0..cfg.iters {
        let dt = d.transpose();
        let fresh: Vec<Vec<(usize, f64)>> = (0..count)
            .into_par_iter()
            .map(|j| {
                let x = omp_with_transpose(&dt, &signals.col(j), cfg.sparsity, omp_tol);
                x.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(k, v)| (k, *v))
                    .collect()
            })
            .collect();
        for (j, code) in fresh.into_iter().enumerate() {
            if patch_error(signals, &d, &code, j) <= patch_error(signals, &d, &codes[j], j) {
                codes[j] = code;
            }
        }

        // users[k] lists (signal, position in its code) pairs using atom k.
        let mut users: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cfg.atoms];
        for (j, code) in codes.iter().enumerate() {
            for (p, &(k, _)) in code.iter().enumerate() {
                users[k].push((j, p));
            }
        }
        for k in 0..cfg.atoms {
            if users[k].is_empty() {
                let worst = (0..count)
                    .map(|j| (j, patch_error(signals, &d, &codes[j], j)))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(j, _)| j)
                    .expect("non-empty signal set");
                let col = signals.col(worst);
                let n = norm2(&col);
                if n > 0.0 {
                    d.set_col(k, &col.iter().map(|v| v / n).collect::<Vec<_>>());
                    replaced += 1;
                }
                continue;
            }
            // Residual without atom k on its users: E = Y_ω − Σ_{k'≠k} d_k' x_k'.
            let mut e = Mat::zeros(dim, users[k].len());
            let mut xk = vec![0.0; users[k].len()];
            for (c, &(j, p)) in users[k].iter().enumerate() {
                let mut r = signals.col(j);
                for (q, &(a, v)) in codes[j].iter().enumerate() {
                    if q == p {
                        xk[c] = v;
                        continue;
                    }
                    for (i, ri) in r.iter_mut().enumerate() {
                        *ri -= d[(i, a)] * v;
                    }
                }
                e.set_col(c, &r);
            }
            let (atom, coeffs) = rank_one(&e, &d.col(k), &xk);
            d.set_col(k, &atom);
            for (c, &(j, p)) in users[k].iter().enumerate() {
                codes[j][p].1 = coeffs[c];
            }
        }
        let err = mean_error(signals, &d, &codes);
        errors.push(err);
        if err <= cfg.error_goal {
            break;
        }
    }
    Ok(KsvdResult {
        dictionary: d,
        errors,
        replaced_atoms: replaced,
    })
}

/// Best rank-one fit `E ≈ d·xᵀ` with `‖d‖ = 1`, by alternating updates from
/// the current pair; every step is non-increasing in `‖E − d·xᵀ‖`.
fn rank_one(e: &Mat, d0: &[f64], x0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d = d0.to_vec();
    let mut x = x0.to_vec();
    for _ in 0..50 {
        let ex = e.matvec(&x);
        let n = norm2(&ex);
        if n == 0.0 {
            break;
        }
        let d_new: Vec<f64> = ex.iter().map(|v| v / n).collect();
        let x_new = e.t_matvec(&d_new);
        let change: f64 = d_new
            .iter()
            .zip(&d)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        d = d_new;
        x = x_new;
        if change < 1e-12 {
            break;
        }
    }
    (d, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::householder_qr;

    fn orthonormal(n: usize, seed: u64) -> Mat {
        let mut s = Seed(seed).stream(0);
        householder_qr(&Mat::from_fn(n, n, |_, _| s.normal())).0
    }

    #[test]
    fn omp_orthonormal_cases() {
        let d = orthonormal(8, 1);
        let x = omp(&d, &d.col(5), 1, 1e-12);
        assert!((x[5] - 1.0).abs() < 1e-12);
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 1);

        let y: Vec<f64> = (0..8).map(|i| 2.0 * d[(i, 3)] + 0.5 * d[(i, 7)]).collect();
        let x = omp(&d, &y, 2, 1e-12);
        assert!((x[3] - 2.0).abs() < 1e-12 && (x[7] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn omp_residual_is_orthogonal_to_support() {
        let mut s = Seed(3).stream(0);
        let d = Mat::from_fn(10, 20, |_, _| s.normal()).normalize_columns();
        let y: Vec<f64> = (0..10).map(|_| s.normal()).collect();
        let x = omp(&d, &y, 4, 0.0);
        let r: Vec<f64> = y.iter().zip(d.matvec(&x)).map(|(a, b)| a - b).collect();
        let support: Vec<usize> = (0..20).filter(|&j| x[j] != 0.0).collect();
        assert!(support.len() <= 4);
        for j in support {
            assert!(dot(&d.col(j), &r).abs() < 1e-8);
        }
    }

    #[test]
    fn omp_recovers_support_under_low_coherence() {
        // Spikes plus a normalized Hadamard basis: mutual coherence 1/8, below
        // the 1/(2k − 1) = 1/5 recovery bound for k = 3.
        let n = 64;
        let mut had = Mat::from_fn(1, 1, |_, _| 1.0);
        while had.rows() < n {
            let top = had.hstack(&had);
            let bottom = had.hstack(&had.scale(-1.0));
            had = top.vstack(&bottom);
        }
        let d = Mat::identity(n).hstack(&had.scale(1.0 / (n as f64).sqrt()));
        let gram = d.t_matmul(&d).add_identity(-1.0);
        assert!(gram.max_abs() < 0.2);
        let mut s = Seed(5).stream(0);
        let support = [2usize, 70, 101];
        let mut x0 = vec![0.0; 2 * n];
        for &j in &support {
            x0[j] = if s.coin() { 1.0 } else { -1.0 } * s.uniform(0.5, 2.0);
        }
        let x = omp(&d, &d.matvec(&x0), 3, 1e-12);
        let found: Vec<usize> = (0..2 * n).filter(|&j| x[j].abs() > 1e-9).collect();
        assert_eq!(found, support);
        for &j in &support {
            assert!((x[j] - x0[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn ksvd_planted_dictionary() {
        let q = orthonormal(8, 6);
        let mut s = Seed(7).stream(0);
        // Each signal is a scaled copy of one atom.
        let signals = Mat::from_fn(8, 40, |i, j| q[(i, j % 8)] * (1.0 + (j / 8) as f64));
        let _ = s.normal();
        let cfg = KsvdConfig {
            atoms: 8,
            sparsity: 1,
            iters: 10,
            error_goal: 1e-20,
            seed: Seed(8),
        };
        let res = ksvd_learn(&signals, &cfg).unwrap();
        assert!(*res.errors.last().unwrap() <= 1e-8);
        // Learned atoms match the planted ones up to sign and permutation.
        let overlap = q.t_matmul(&res.dictionary);
        for i in 0..8 {
            let best = (0..8).map(|j| overlap[(i, j)].abs()).fold(0.0, f64::max);
            assert!((best - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn ksvd_zero_iterations_returns_initialization() {
        let mut s = Seed(9).stream(0);
        let signals = Mat::from_fn(6, 30, |_, _| s.normal());
        let cfg = KsvdConfig {
            atoms: 5,
            sparsity: 2,
            iters: 0,
            error_goal: 0.0,
            seed: Seed(10),
        };
        let res = ksvd_learn(&signals, &cfg).unwrap();
        assert!(res.errors.is_empty());
        let picks = Seed(10).stream(0).sample_indices(30, 5);
        let init = signals.select_cols(&picks).normalize_columns();
        assert_eq!(res.dictionary, init);
    }

    #[test]
    fn ksvd_error_is_non_increasing() {
        let mut s = Seed(11).stream(0);
        let truth = Mat::from_fn(12, 20, |_, _| s.normal()).normalize_columns();
        let signals = Mat::from_fn(12, 200, |_, _| 0.0);
        let mut signals = signals;
        for j in 0..200 {
            let mut col = vec![0.0; 12];
            for _ in 0..3 {
                let k = s.below(20);
                let c = s.normal();
                for (i, v) in col.iter_mut().enumerate() {
                    *v += c * truth[(i, k)];
                }
            }
            signals.set_col(j, &col);
        }
        let cfg = KsvdConfig {
            atoms: 20,
            sparsity: 3,
            iters: 15,
            error_goal: 0.0,
            seed: Seed(12),
        };
        let res = ksvd_learn(&signals, &cfg).unwrap();
        for w in res.errors.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", w[0], w[1]);
        }
        let norms = res.dictionary.column_norms();
        assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-10));
    }

    #[test]
    fn ksvd_rejects_empty_input() {
        let cfg = KsvdConfig {
            atoms: 1,
            sparsity: 1,
            iters: 1,
            error_goal: 0.0,
            seed: Seed(0),
        };
        assert!(matches!(ksvd_learn(&Mat::zeros(4, 0), &cfg), Err(Error::Input(_))));
    }
}
