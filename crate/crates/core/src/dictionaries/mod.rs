//! Sparsifying dictionaries: periodized CDF 9/7 wavelet dictionaries and
//! K-SVD dictionaries learned from image patches.

mod cdf97;
mod ksvd;
mod patches;

pub use cdf97::{
    detail_atom, forward_1d, inverse_1d, nominal_support, synthesis_matrix, wavelet_2d, Direction,
};
pub use ksvd::{ksvd_learn, omp, KsvdConfig, KsvdResult};
pub use patches::{extract_patches, PatchSet};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::Seed;

/// A dictionary with its lowpass/highpass column split.
#[derive(Clone, Debug)]
pub struct WaveletDict {
    pub d: Mat,
    pub levels: usize,
    pub lowpass_cols: Vec<usize>,
    pub highpass_cols: Vec<usize>,
}

impl WaveletDict {
    pub fn rows(&self) -> usize {
        self.d.rows()
    }

    pub fn cols(&self) -> usize {
        self.d.cols()
    }
}

/// Overcomplete 1D dictionary: for each level `1..=levels`, the level's
/// synthesis wavelet at all `signal_len` circular shifts, followed by
/// Gaussian columns up to `total_cols`. Every column has unit norm.
pub fn cdf97_dictionary(signal_len: usize, levels: usize, total_cols: usize, seed: Seed) -> Result<WaveletDict> {
    if levels == 0 {
        return Err(Error::Level("at least one level is required".into()));
    }
    let needed = nominal_support(levels);
    if needed > signal_len || signal_len % (1usize << levels) != 0 {
        return Err(Error::Level(format!(
            "level {levels} needs a signal length divisible by 2^{levels} and at least {needed} samples, got {signal_len}"
        )));
    }
    let wavelet_cols = levels * signal_len;
    if total_cols < wavelet_cols {
        return Err(Error::dim(format!(
            "{total_cols} columns cannot hold {wavelet_cols} wavelet atoms"
        )));
    }
    let mut d = Mat::zeros(signal_len, total_cols);
    for j in 1..=levels {
        let atom = detail_atom(signal_len, j)?;
        for t in 0..signal_len {
            let col = (j - 1) * signal_len + t;
            for i in 0..signal_len {
                d[(i, col)] = atom[(i + signal_len - t) % signal_len];
            }
        }
    }
    let mut s = seed.stream(0);
    for col in wavelet_cols..total_cols {
        for i in 0..signal_len {
            d[(i, col)] = s.normal();
        }
    }
    Ok(WaveletDict {
        d: d.normalize_columns(),
        levels,
        lowpass_cols: Vec::new(),
        highpass_cols: (0..wavelet_cols).collect(),
    })
}

/// Square basis dictionary of the `levels`-level transform on length `n`,
/// columns normalized. The first `n/2^levels` columns are lowpass.
pub fn cdf97_basis(n: usize, levels: usize) -> Result<WaveletDict> {
    let w = synthesis_matrix(n, levels)?;
    let low = n >> levels;
    Ok(WaveletDict {
        d: w.normalize_columns(),
        levels,
        lowpass_cols: (0..low).collect(),
        highpass_cols: (low..n).collect(),
    })
}

/// A 2D coefficient grid with its highpass mask (everything outside the
/// top-left lowpass×lowpass block).
#[derive(Clone, Debug)]
pub struct CoeffGrid {
    pub x: Mat,
    /// Row-major, `true` for highpass entries.
    pub highpass_mask: Vec<bool>,
}

impl CoeffGrid {
    /// Marks the `low_rows×low_cols` top-left block as lowpass.
    pub fn new(x: Mat, low_rows: usize, low_cols: usize) -> Self {
        let mask = highpass_mask(x.rows(), x.cols(), low_rows, low_cols);
        Self {
            x,
            highpass_mask: mask,
        }
    }

    pub fn is_highpass(&self, i: usize, j: usize) -> bool {
        self.highpass_mask[i * self.x.cols() + j]
    }
}

/// Row-major highpass mask for a grid whose lowpass block is the top-left
/// `low_rows×low_cols` corner.
pub fn highpass_mask(rows: usize, cols: usize, low_rows: usize, low_cols: usize) -> Vec<bool> {
    (0..rows * cols)
        .map(|t| t / cols >= low_rows || t % cols >= low_cols)
        .collect()
}
