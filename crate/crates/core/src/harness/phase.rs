use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::image_io::read_image;
use super::phantom::piecewise_smooth;
use crate::dictionaries::{cdf97_dictionary, extract_patches, ksvd_learn, KsvdConfig};
use crate::ensembles::{draw_ensemble, draw_row_selector, EnsembleKind};
use crate::error::{Error, Result};
use crate::factorize::{build_sensing, factorize, Construction};
use crate::linalg::{matfile, Mat};
use crate::recovery::{cosamp, SparseRecoveryConfig};
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictSource {
    /// Shifted CDF 9/7 wavelets padded with Gaussian columns.
    Wavelet,
    /// K-SVD learned from image patches.
    Ksvd,
    /// An RFMX matrix file.
    File,
}

impl std::str::FromStr for DictSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wavelet" => Ok(Self::Wavelet),
            "ksvd" => Ok(Self::Ksvd),
            "file" => Ok(Self::File),
            other => Err(Error::Config(format!("unknown dictionary source '{other}'"))),
        }
    }
}

/// A recovery program compared in the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arm {
    /// Sensing through `S = ℰG⁻¹`: recover `x` from `ℰG⁻¹D·x`.
    Factored,
    /// Recover `x` from `ℰA·x`.
    Benchmark,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Factored => "factored",
            Arm::Benchmark => "benchmark",
        }
    }
}

impl std::str::FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factored" => Ok(Arm::Factored),
            "benchmark" => Ok(Arm::Benchmark),
            other => Err(Error::Config(format!("unknown arm '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseTransitionConfig {
    /// Dictionary columns (signal sparsity domain).
    pub n: usize,
    /// Dictionary rows (signal length).
    pub l: usize,
    pub dict_source: DictSource,
    pub wavelet_levels: usize,
    pub dict_file: Option<PathBuf>,
    /// Training image for K-SVD; a synthetic phantom when absent.
    pub ksvd_image: Option<PathBuf>,
    pub ksvd_iters: usize,
    pub ksvd_sparsity: usize,
    pub ensemble: EnsembleKind,
    pub construction: Construction,
    pub sparsity_levels: Vec<usize>,
    /// Values of `m/n`; `m = round(ratio·n)` must not exceed `l`.
    pub cs_ratios: Vec<f64>,
    pub trials: usize,
    /// Success when `‖x̂ − x‖₁` is strictly below this; `n·10⁻²` if absent.
    pub success_l1_threshold: Option<f64>,
    pub cosamp_iters: usize,
    pub base_seed: Seed,
}

impl Default for PhaseTransitionConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl PhaseTransitionConfig {
    /// Desk scale: `n = 256`, `l = 64`, 200 trials, `m = 8, 16, …, 64`.
    pub fn desk() -> Self {
        Self {
            n: 256,
            l: 64,
            dict_source: DictSource::Wavelet,
            wavelet_levels: 3,
            dict_file: None,
            ksvd_image: None,
            ksvd_iters: 10,
            ksvd_sparsity: 8,
            ensemble: EnsembleKind::Gaussian,
            construction: Construction::Range,
            sparsity_levels: vec![10, 12, 14],
            cs_ratios: (1..=8).map(|j| j as f64 / 32.0).collect(),
            trials: 200,
            success_l1_threshold: None,
            cosamp_iters: 50,
            base_seed: Seed(0),
        }
    }

    /// Full scale: `n = 1024`, `l = 128`, 2,000 trials, `m = 16, 32, …, 128`.
    pub fn paper() -> Self {
        Self {
            n: 1024,
            l: 128,
            wavelet_levels: 5,
            ksvd_iters: 50,
            trials: 2000,
            cs_ratios: (1..=8).map(|j| j as f64 / 64.0).collect(),
            ..Self::desk()
        }
    }

    pub fn threshold(&self) -> f64 {
        self.success_l1_threshold.unwrap_or(self.n as f64 * 1e-2)
    }

    /// Measurement count for a ratio.
    pub fn rows_for(&self, ratio: f64) -> usize {
        (ratio * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.l == 0 || self.l > self.n {
            return Err(Error::Config(format!(
                "need 0 < l ≤ n, got l = {}, n = {}",
                self.l, self.n
            )));
        }
        if self.trials == 0 || self.cosamp_iters == 0 {
            return Err(Error::Config("trials and cosamp_iters must be at least 1".into()));
        }
        if self.sparsity_levels.is_empty() || self.cs_ratios.is_empty() {
            return Err(Error::Config("sparsity_levels and cs_ratios must be non-empty".into()));
        }
        for &k in &self.sparsity_levels {
            if k == 0 || k > self.n {
                return Err(Error::Config(format!("sparsity {k} outside 1..={}", self.n)));
            }
        }
        for &r in &self.cs_ratios {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("CS ratio {r} outside (0, 1]")));
            }
            let m = self.rows_for(r);
            if m == 0 || m > self.l {
                return Err(Error::Config(format!(
                    "CS ratio {r} needs m = {m} measurements, but only 1..={} are available",
                    self.l
                )));
            }
        }
        if self.dict_source == DictSource::Wavelet && self.wavelet_levels * self.l >= self.n {
            // Detail atoms alone miss the constant signal; at least one
            // random column is needed for a full-rank dictionary.
            return Err(Error::Config(format!(
                "{} wavelet levels on length {} leave no room in n = {} for the completing columns",
                self.wavelet_levels, self.l, self.n
            )));
        }
        if !(self.threshold() > 0.0) {
            return Err(Error::Config("success threshold must be positive".into()));
        }
        Ok(())
    }

    /// The `l×n` dictionary this configuration describes.
    pub fn dictionary(&self) -> Result<Mat> {
        let d = match self.dict_source {
            DictSource::Wavelet => {
                cdf97_dictionary(self.l, self.wavelet_levels, self.n, self.base_seed.derive(0xD1C7))?.d
            }
            DictSource::File => {
                let path = self
                    .dict_file
                    .as_ref()
                    .ok_or_else(|| Error::Config("dict_source = \"file\" needs dict_file".into()))?;
                matfile::read_mat(path)?
            }
            DictSource::Ksvd => self.learn_ksvd()?,
        };
        if d.shape() != (self.l, self.n) {
            return Err(Error::Config(format!(
                "dictionary is {:?}, configuration expects {}×{}",
                d.shape(),
                self.l,
                self.n
            )));
        }
        Ok(d)
    }

    fn learn_ksvd(&self) -> Result<Mat> {
        let image = match &self.ksvd_image {
            Some(p) => read_image(p)?.pixels,
            None => piecewise_smooth(256, 256),
        };
        let patches = patch_signals(&image, self.l)?;
        let cfg = KsvdConfig {
            atoms: self.n,
            sparsity: self.ksvd_sparsity,
            iters: self.ksvd_iters,
            error_goal: 1e-8,
            seed: self.base_seed.derive(0x75D),
        };
        Ok(ksvd_learn(&patches, &cfg)?.dictionary)
    }
}

/// Training vectors of length `l` from an image: `s×s` windows when
/// `l = s²`, or `2s×2s` windows keeping every other column when `l = 2s²`,
/// on a stride-4 grid, re-centred after decimation.
pub fn patch_signals(image: &Mat, l: usize) -> Result<Mat> {
    let side = |v: usize| {
        let s = (v as f64).sqrt().round() as usize;
        (s * s == v).then_some(s)
    };
    if let Some(s) = side(l) {
        return Ok(extract_patches(image, (s, s), (4, 4))?.patches);
    }
    let s = (l % 2 == 0).then(|| side(l / 2)).flatten().ok_or_else(|| {
        Error::Config(format!("patch length {l} is neither s² nor 2s²"))
    })?;
    let w = 2 * s;
    let full = extract_patches(image, (w, w), (4, 4))?.patches;
    let keep: Vec<usize> = (0..w * w).filter(|i| (i % w) % 2 == 0).collect();
    let mut out = full.select_rows(&keep);
    for j in 0..out.cols() {
        let mut c = out.col(j);
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        c.iter_mut().for_each(|v| *v -= mean);
        out.set_col(j, &c);
    }
    Ok(out)
}

/// A `k`-sparse vector with uniformly placed support and entries uniform on
/// `[−1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseSignalSpec {
    pub n: usize,
    pub k: usize,
}

impl SparseSignalSpec {
    pub fn draw(&self, seed: Seed) -> Vec<f64> {
        let mut s = seed.stream(0);
        let mut x = vec![0.0; self.n];
        for j in s.sample_indices(self.n, self.k) {
            // Redraw exact zeros so the support size is always k.
            let mut v = 0.0;
            while v == 0.0 {
                v = s.uniform(-1.0, 1.0);
            }
            x[j] = v;
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub k: usize,
    pub ratio: f64,
    pub m: usize,
    pub arm: Arm,
    pub successes: usize,
    pub trials: usize,
    pub success_prob: f64,
    /// Seed of this point's draws (`A`, `ℰ` and per-trial signals).
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub total_seconds: f64,
    pub mean_point_seconds: f64,
    pub max_point_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: PhaseTransitionConfig,
    /// SHA-256 of the configuration and the dictionary.
    pub input_hash: String,
    pub points: Vec<PhasePoint>,
    pub wall_clock: WallClock,
}

impl ExperimentRecord {
    /// Success probabilities of one `(k, arm)` curve, in ratio order.
    pub fn curve(&self, k: usize, arm: Arm) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.k == k && p.arm == arm)
            .map(|p| (p.ratio, p.success_prob))
            .collect()
    }
}

/// Hex SHA-256 over the JSON configuration followed by the dictionary's
/// RFMX encoding.
pub fn input_hash(cfg: &PhaseTransitionConfig, d: &Mat) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cfg).expect("configuration serializes"));
    h.update(matfile::encode_mat(d));
    hex::encode(h.finalize())
}

/// Seed of the `(k, m)` point. Depends only on the point's coordinates, so
/// results do not depend on sweep order.
pub fn point_seed(base: Seed, k: usize, m: usize) -> Seed {
    base.derive(k as u64).derive(m as u64)
}

fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Runs the sweep with the dictionary the configuration describes.
pub fn run_phase_transition(cfg: &PhaseTransitionConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let d = cfg.dictionary()?;
    run_phase_transition_with(cfg, &d)
}

/// Runs the sweep on an explicit `l×n` dictionary.
///
/// Per `(k, ratio)` point: draw `A` and `ℰ`, factor `D = G·A·H`, then for
/// each trial draw one sparse `x` and recover it in both arms. Trials run
/// in parallel; every draw is seeded from the point and trial index.
pub fn run_phase_transition_with(cfg: &PhaseTransitionConfig, d: &Mat) -> Result<ExperimentRecord> {
    cfg.validate()?;
    if d.shape() != (cfg.l, cfg.n) {
        return Err(Error::Config(format!(
            "dictionary is {:?}, configuration expects {}×{}",
            d.shape(),
            cfg.l,
            cfg.n
        )));
    }
    let start = Instant::now();
    let threshold = cfg.threshold();
    let mut points = Vec::new();
    let mut point_times = Vec::new();
    for &k in &cfg.sparsity_levels {
        for &ratio in &cfg.cs_ratios {
            let t0 = Instant::now();
            let m = cfg.rows_for(ratio);
            let seed = point_seed(cfg.base_seed, k, m);
            let a = draw_ensemble(cfg.ensemble, cfg.l, cfg.n, seed.derive(0));
            let fact = factorize(cfg.construction, d, &a).map_err(|e| e.at_stage("factorization"))?;
            let selector = draw_row_selector(m, cfg.l, seed.derive(1))?;
            let system = build_sensing(&fact, d, &selector)?;
            let benchmark = system.benchmark();
            let spec = SparseSignalSpec { n: cfg.n, k };
            let rc = SparseRecoveryConfig {
                max_iters: cfg.cosamp_iters,
                ..SparseRecoveryConfig::new(k.min(m))
            };
            let outcomes: Vec<(bool, bool)> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| -> Result<(bool, bool)> {
                    let x = spec.draw(seed.derive(2).derive(t as u64));
                    let z = system.composed.matvec(&x);
                    let ours = cosamp(&system.composed, &z, &rc)?;
                    let zb = benchmark.matvec(&x);
                    let theirs = cosamp(&benchmark, &zb, &rc)?;
                    Ok((
                        l1_dist(&ours.estimate, &x) < threshold,
                        l1_dist(&theirs.estimate, &x) < threshold,
                    ))
                })
                .collect::<Result<_>>()?;
            for (arm, hits) in [
                (Arm::Factored, outcomes.iter().filter(|o| o.0).count()),
                (Arm::Benchmark, outcomes.iter().filter(|o| o.1).count()),
            ] {
                points.push(PhasePoint {
                    k,
                    ratio,
                    m,
                    arm,
                    successes: hits,
                    trials: cfg.trials,
                    success_prob: hits as f64 / cfg.trials as f64,
                    seed: seed.0,
                });
            }
            point_times.push(t0.elapsed().as_secs_f64());
        }
    }
    let total = start.elapsed().as_secs_f64();
    Ok(ExperimentRecord {
        config: cfg.clone(),
        input_hash: input_hash(cfg, d),
        points,
        wall_clock: WallClock {
            total_seconds: total,
            mean_point_seconds: point_times.iter().sum::<f64>() / point_times.len().max(1) as f64,
            max_point_seconds: point_times.iter().cloned().fold(0.0, f64::max),
        },
    })
}
