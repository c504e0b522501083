use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::factorize::SensingSystem;
use crate::linalg::{norm2, pinv, Mat};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseRecoveryConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Halting threshold on `‖z − Φx̂‖`, relative to `‖z‖`.
    pub halt_tol: f64,
}

impl SparseRecoveryConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iters: 50,
            halt_tol: 1e-6,
        }
    }
}

fn top_indices(v: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    // Ties break toward lower indices so runs are reproducible.
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

/// Compressive sampling matched pursuit.
///
/// Each iteration forms the proxy `Φᵀr`, merges its `2k` largest entries
/// with the current support, solves least squares on the merged support
/// (pseudo-inverse, so rank deficiency is tolerated) and prunes to the `k`
/// largest coefficients. An iteration that would increase the residual is
/// discarded and the loop stops, so the trace is non-increasing.
pub fn cosamp(phi: &Mat, z: &[f64], cfg: &SparseRecoveryConfig) -> Result<RecoveryResult<Vec<f64>>> {
    let (m, n) = phi.shape();
    if z.len() != m {
        return Err(Error::dim(format!("measurements have length {}, Φ has {m} rows", z.len())));
    }
    if cfg.k == 0 || cfg.k > n || cfg.max_iters == 0 {
        return Err(Error::Input(format!(
            "need 1 ≤ k ≤ {n} and at least one iteration (k = {}, max_iters = {})",
            cfg.k, cfg.max_iters
        )));
    }
    let halt = cfg.halt_tol * norm2(z);
    let mut x = vec![0.0; n];
    let mut r = z.to_vec();
    let mut rnorm = norm2(&r);
    let mut trace = Vec::new();
    let mut converged = rnorm <= halt;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iters {
        iterations += 1;
        let proxy = phi.t_matvec(&r);
        let mut merged = top_indices(&proxy, 2 * cfg.k);
        merged.extend((0..n).filter(|&j| x[j] != 0.0));
        merged.sort_unstable();
        merged.dedup();
        let sub = phi.select_cols(&merged);
        let b = pinv(&sub, None).matvec(z);
        let keep = top_indices(&b, cfg.k);
        let mut candidate = vec![0.0; n];
        for &p in &keep {
            candidate[merged[p]] = b[p];
        }
        let fit = phi.matvec(&candidate);
        let r_new: Vec<f64> = z.iter().zip(&fit).map(|(a, b)| a - b).collect();
        let n_new = norm2(&r_new);
        if n_new > rnorm {
            trace.push(rnorm);
            break;
        }
        x = candidate;
        r = r_new;
        rnorm = n_new;
        trace.push(rnorm);
        converged = rnorm <= halt;
    }
    Ok(RecoveryResult {
        estimate: x,
        iterations: trace.len(),
        residual_trace: trace,
        converged,
    })
}

/// Recovers `x` from `z = S·D·x` through the composed operator `ℰG⁻¹D`.
pub fn recover_synthesis(
    system: &SensingSystem,
    z: &[f64],
    cfg: &SparseRecoveryConfig,
) -> Result<RecoveryResult<Vec<f64>>> {
    cosamp(&system.composed, z, cfg)
}

/// The benchmark program: recovers `x` from `z = ℰ·A·x`.
pub fn recover_benchmark(
    system: &SensingSystem,
    z: &[f64],
    cfg: &SparseRecoveryConfig,
) -> Result<RecoveryResult<Vec<f64>>> {
    cosamp(&system.benchmark(), z, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{draw_ensemble, EnsembleKind, RowSelector};
    use crate::factorize::{build_sensing, factor_spectral};
    use crate::rng::Seed;

    fn sparse(n: usize, k: usize, seed: Seed) -> Vec<f64> {
        let mut s = seed.stream(0);
        let mut x = vec![0.0; n];
        for j in s.sample_indices(n, k) {
            x[j] = s.uniform(-1.0, 1.0);
        }
        x
    }

    #[test]
    fn identity_operator_recovers_in_one_iteration() {
        let x0 = sparse(20, 3, Seed(1));
        let res = cosamp(&Mat::identity(20), &x0, &SparseRecoveryConfig::new(3)).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        assert_eq!(res.estimate, x0);
    }

    #[test]
    fn gaussian_recovery_rate() {
        let trials = 60;
        let mut ok = 0;
        for t in 0..trials {
            let seed = Seed(100).derive(t);
            let phi = draw_ensemble(EnsembleKind::Gaussian, 100, 256, seed.derive(0));
            let x0 = sparse(256, 5, seed.derive(1));
            let z = phi.matvec(&x0);
            let res = cosamp(&phi, &z, &SparseRecoveryConfig::new(5)).unwrap();
            assert!(res.estimate.iter().filter(|v| **v != 0.0).count() <= 5);
            assert!(res.residual_trace.windows(2).all(|w| w[1] <= w[0]));
            let err: f64 = norm2(&res.estimate.iter().zip(&x0).map(|(a, b)| a - b).collect::<Vec<_>>());
            if err <= 1e-6 {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.9 * trials as f64, "{ok}/{trials}");
    }

    #[test]
    fn estimate_is_exactly_k_sparse() {
        let phi = draw_ensemble(EnsembleKind::Gaussian, 30, 80, Seed(3));
        let mut s = Seed(4).stream(0);
        let z: Vec<f64> = (0..30).map(|_| s.normal()).collect();
        let res = cosamp(&phi, &z, &SparseRecoveryConfig::new(4)).unwrap();
        assert_eq!(res.estimate.iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn matched_dictionary_gives_identical_arms() {
        let d = draw_ensemble(EnsembleKind::Gaussian, 20, 40, Seed(5));
        let f = factor_spectral(&d, &d).unwrap();
        let sys = build_sensing(&f, &d, &RowSelector::identity(20)).unwrap();
        let x0 = sparse(40, 2, Seed(6));
        let z = sys.composed.matvec(&x0);
        let cfg = SparseRecoveryConfig::new(2);
        let a = recover_synthesis(&sys, &z, &cfg).unwrap();
        let b = recover_benchmark(&sys, &z, &cfg).unwrap();
        for (x, y) in a.estimate.iter().zip(&b.estimate) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
