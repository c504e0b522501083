use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, CMat, Mat};
use crate::rng::Seed;

/// Row-undersampling pattern for k-space (the diagonal of `ℛ`).
///
/// Frequency index 0 is row 0, so the fully sampled low-frequency block
/// wraps around the ends: rows `[−⌊c/2⌋, c − ⌊c/2⌋) mod n₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccelMask {
    pub n1: usize,
    /// Acceleration factor, `n₁ / (rows kept)` before rounding.
    pub accel: f64,
    pub center_fraction: f64,
    pub selected: Vec<bool>,
}

impl AccelMask {
    /// A mask keeping every row.
    pub fn full(n1: usize) -> Self {
        Self {
            n1,
            accel: 1.0,
            center_fraction: 1.0,
            selected: vec![true; n1],
        }
    }

    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    /// Sampled row indices in increasing order.
    pub fn rows(&self) -> Vec<usize> {
        (0..self.n1).filter(|&i| self.selected[i]).collect()
    }

    /// Rows of the fully sampled low-frequency block.
    pub fn center_rows(&self) -> Vec<usize> {
        center_block(self.n1, (self.center_fraction * self.n1 as f64).round() as usize)
    }

    /// `ℛ·M`: zeroes the unsampled rows of a real matrix.
    pub fn apply(&self, m: &Mat) -> Mat {
        m.scale_rows(&self.weights())
    }

    /// 0/1 weights, one per row.
    pub fn weights(&self) -> Vec<f64> {
        self.selected.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
    }
}

fn center_block(n1: usize, c: usize) -> Vec<usize> {
    let half = c / 2;
    (0..c).map(|t| (t + n1 - half) % n1).collect()
}

/// Default mask for 4× (8% center) or 8× (4% center) acceleration.
pub fn make_mask(n1: usize, accel: u32, seed: Seed) -> Result<AccelMask> {
    let center = match accel {
        4 => 0.08,
        8 => 0.04,
        other => {
            return Err(Error::Config(format!(
                "acceleration {other}× has no default center fraction; use make_mask_with"
            )))
        }
    };
    make_mask_with(n1, 1.0 / accel as f64, center, seed)
}

/// Mask keeping `round(fraction·n₁)` rows, of which `round(center_fraction·n₁)`
/// form the contiguous block around DC; the rest are drawn uniformly
/// without replacement from the remaining rows.
pub fn make_mask_with(n1: usize, fraction: f64, center_fraction: f64, seed: Seed) -> Result<AccelMask> {
    if n1 < 16 {
        return Err(Error::Input(format!("masks need at least 16 rows, got {n1}")));
    }
    if !(fraction > 0.0 && fraction <= 1.0) || !(0.0..=1.0).contains(&center_fraction) {
        return Err(Error::Config(format!(
            "sampling fraction {fraction} must lie in (0, 1] and center fraction {center_fraction} in [0, 1]"
        )));
    }
    let total = (fraction * n1 as f64).round() as usize;
    let c = (center_fraction * n1 as f64).round() as usize;
    if c > total {
        return Err(Error::Config(format!(
            "center block of {c} rows exceeds the {total} rows kept"
        )));
    }
    let mut selected = vec![false; n1];
    for i in center_block(n1, c) {
        selected[i] = true;
    }
    let rest: Vec<usize> = (0..n1).filter(|&i| !selected[i]).collect();
    for p in seed.stream(0).sample_indices(rest.len(), total - c) {
        selected[rest[p]] = true;
    }
    Ok(AccelMask {
        n1,
        accel: 1.0 / fraction,
        center_fraction,
        selected,
    })
}

/// `Y = ℛ·F₁·Z·F₂` with unitary DFTs; unsampled rows are exactly zero.
pub fn simulate_kspace(z: &Mat, mask: &AccelMask) -> Result<CMat> {
    let (n1, n2) = z.shape();
    let (f1, f2) = (dft_matrix(n1), dft_matrix(n2));
    simulate_kspace_with(z, mask, &f1, &f2)
}

/// [`simulate_kspace`] with precomputed transforms.
pub fn simulate_kspace_with(z: &Mat, mask: &AccelMask, f1: &CMat, f2: &CMat) -> Result<CMat> {
    let (n1, n2) = z.shape();
    if mask.n1 != n1 || mask.selected.len() != n1 || f1.shape() != (n1, n1) || f2.shape() != (n2, n2) {
        return Err(Error::dim(format!(
            "image is {n1}×{n2}, mask has {} rows, transforms are {:?} and {:?}",
            mask.n1,
            f1.shape(),
            f2.shape()
        )));
    }
    Ok(f1.matmul_real(z).matmul(f2).scale_rows(&mask.weights()))
}

/// Zero-filled reconstruction `Re(F₁ᴴ·Y·F₂ᴴ)`.
pub fn zero_fill(y: &CMat) -> Mat {
    let (n1, n2) = y.shape();
    zero_fill_with(y, &dft_matrix(n1), &dft_matrix(n2))
}

pub fn zero_fill_with(y: &CMat, f1: &CMat, f2: &CMat) -> Mat {
    f1.adjoint().matmul(y).matmul(&f2.adjoint()).re()
}
