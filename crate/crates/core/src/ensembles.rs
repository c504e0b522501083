//! Random matrix ensembles, row selectors and empirical RIP constants.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, svd, Mat};
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// i.i.d. `N(0, 1/n)` entries.
    Gaussian,
    /// i.i.d. `±1/√n` entries with equal probability.
    Bernoulli,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "bernoulli" => Ok(Self::Bernoulli),
            other => Err(Error::Config(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// Draws an `l×n` matrix from the ensemble.
pub fn draw_ensemble(kind: EnsembleKind, l: usize, n: usize, seed: Seed) -> Mat {
    let mut s = seed.stream(0);
    let scale = 1.0 / (n.max(1) as f64).sqrt();
    match kind {
        EnsembleKind::Gaussian => Mat::from_fn(l, n, |_, _| scale * s.normal()),
        EnsembleKind::Bernoulli => Mat::from_fn(l, n, |_, _| if s.coin() { scale } else { -scale }),
    }
}

/// Keeps `m` of `l` rows, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSelector {
    l: usize,
    indices: Vec<usize>,
}

impl RowSelector {
    pub fn new(l: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("row indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&i| i >= l) {
            return Err(Error::dim(format!("row index out of range for {l} rows")));
        }
        Ok(Self { l, indices })
    }

    pub fn identity(l: usize) -> Self {
        Self {
            l,
            indices: (0..l).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `ℰ·M`.
    pub fn apply(&self, m: &Mat) -> Mat {
        assert_eq!(m.rows(), self.l, "selector expects {} rows", self.l);
        m.select_rows(&self.indices)
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.l);
        self.indices.iter().map(|&i| v[i]).collect()
    }

    /// The explicit `m×l` 0/1 matrix.
    pub fn to_matrix(&self) -> Mat {
        self.apply(&Mat::identity(self.l))
    }
}

/// Uniform selection of `m` distinct rows out of `l`.
pub fn draw_row_selector(m: usize, l: usize, seed: Seed) -> Result<RowSelector> {
    if m == 0 || m > l {
        return Err(Error::dim(format!("cannot select {m} of {l} rows")));
    }
    if m == l {
        return Ok(RowSelector::identity(l));
    }
    let indices = seed.stream(0).sample_indices(l, m);
    Ok(RowSelector { l, indices })
}

/// How an RIP estimate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RipMode {
    /// Every support enumerated: the value is the exact `δ_k`.
    Exhaustive,
    /// Extreme singular values over sampled supports: a lower bound.
    SampledSupports,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub delta: f64,
    pub mode: RipMode,
    pub supports: usize,
}

const EXHAUSTIVE_LIMIT: f64 = 1e4;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `max |σ²−1|` over the column submatrix on `support`.
pub fn support_delta(m: &Mat, support: &[usize]) -> f64 {
    let sub = m.select_cols(support);
    let d = svd(&sub);
    let smax = d.sigma_max();
    // A submatrix with more columns than rows has a nontrivial kernel.
    let smin = if support.len() > m.rows() { 0.0 } else { d.sigma_min() };
    (smax * smax - 1.0).max(1.0 - smin * smin)
}

/// Empirical restricted isometry constant of order `k`.
///
/// When `C(cols, k) ≤ 10⁴` every support is enumerated and the exact `δ_k`
/// is returned. Otherwise `trials` supports are sampled; trial `t` uses the
/// first `k` entries of a permutation drawn from stream `t`, so supports are
/// nested in `k` and the estimate is monotone in `k`.
pub fn rip_delta(m: &Mat, k: usize, trials: usize, seed: Seed) -> Result<RipEstimate> {
    let n = m.cols();
    if k == 0 || k > n {
        return Err(Error::Input(format!("sparsity {k} outside 1..={n}")));
    }
    if binomial(n, k) <= EXHAUSTIVE_LIMIT {
        let mut support: Vec<usize> = (0..k).collect();
        let mut delta: f64 = 0.0;
        let mut count = 0;
        loop {
            delta = delta.max(support_delta(m, &support));
            count += 1;
            if !next_combination(&mut support, n) {
                break;
            }
        }
        return Ok(RipEstimate {
            delta,
            mode: RipMode::Exhaustive,
            supports: count,
        });
    }
    Ok(rip_delta_sampled(m, k, trials, seed))
}

/// Sampled-support lower bound on `δ_k`, regardless of problem size.
pub fn rip_delta_sampled(m: &Mat, k: usize, trials: usize, seed: Seed) -> RipEstimate {
    let n = m.cols();
    let trials = trials.max(1);
    let mut delta: f64 = 0.0;
    for t in 0..trials {
        let support = sampled_support(n, k, seed, t as u64);
        delta = delta.max(support_delta(m, &support));
    }
    RipEstimate {
        delta,
        mode: RipMode::SampledSupports,
        supports: trials,
    }
}

/// Scalar form of [`rip_delta`].
pub fn estimate_rip_delta(m: &Mat, k: usize, trials: usize, seed: Seed) -> Result<f64> {
    rip_delta(m, k, trials, seed).map(|e| e.delta)
}

/// Monte-Carlo lower bound: `max |‖Mx‖² − 1|` over random unit vectors,
/// `per_support` of them on each given support.
pub fn rip_delta_vectors(m: &Mat, supports: &[Vec<usize>], per_support: usize, seed: Seed) -> f64 {
    let mut s = seed.stream(0);
    let mut delta: f64 = 0.0;
    for support in supports {
        for _ in 0..per_support {
            let vals: Vec<f64> = support.iter().map(|_| s.normal()).collect();
            let norm = norm2(&vals);
            if norm == 0.0 {
                continue;
            }
            let mut y = vec![0.0; m.rows()];
            for (&j, v) in support.iter().zip(&vals) {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += m[(i, j)] * v / norm;
                }
            }
            let e = norm2(&y).powi(2);
            delta = delta.max((e - 1.0).abs());
        }
    }
    delta
}

/// Support of trial `t`: first `k` entries of a seeded permutation.
pub fn sampled_support(n: usize, k: usize, seed: Seed, t: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(seed.stream(t).rng());
    let mut support = perm[..k].to_vec();
    support.sort_unstable();
    support
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
