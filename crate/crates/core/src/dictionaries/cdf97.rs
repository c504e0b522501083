//! CDF 9/7 biorthogonal wavelet by lifting, with periodic extension.
//!
//! Coefficients use the Mallat layout: after `L` levels a length-`n`
//! signal becomes `[s_L | d_L | d_{L-1} | … | d_1]` with `s_L` of length
//! `n/2^L`. The analysis lowpass branch has DC gain `√2`.

use crate::error::{Error, Result};
use crate::linalg::Mat;

const ALPHA: f64 = -1.586_134_342_059_923_6;
const BETA: f64 = -0.052_980_118_572_961_41;
const GAMMA: f64 = 0.882_911_075_530_933_3;
const DELTA: f64 = 0.443_506_852_043_971_15;
const K: f64 = 1.149_604_398_860_241_2;

/// Forward transform, transform direction of [`wavelet_2d`](super::wavelet_2d).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Analyze,
    Synthesize,
}

/// Nominal support (in samples) of a level-`j` synthesis atom used to
/// decide whether a level fits a periodic signal: the 7-tap synthesis
/// lowpass dilated `j − 1` times.
pub fn nominal_support(level: usize) -> usize {
    7usize << level.saturating_sub(1)
}

fn check_levels(n: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Ok(());
    }
    if levels >= usize::BITS as usize || n % (1usize << levels) != 0 {
        return Err(Error::dim(format!(
            "length {n} is not divisible by 2^{levels}"
        )));
    }
    Ok(())
}

fn lift_forward(x: &mut [f64], scratch: &mut Vec<f64>) {
    let n = x.len();
    let h = n / 2;
    scratch.clear();
    scratch.extend_from_slice(x);
    let (s, d) = x.split_at_mut(h);
    for i in 0..h {
        s[i] = scratch[2 * i];
        d[i] = scratch[2 * i + 1];
    }
    let next = |i: usize| if i + 1 == h { 0 } else { i + 1 };
    let prev = |i: usize| if i == 0 { h - 1 } else { i - 1 };
    for i in 0..h {
        d[i] += ALPHA * (s[i] + s[next(i)]);
    }
    for i in 0..h {
        s[i] += BETA * (d[prev(i)] + d[i]);
    }
    for i in 0..h {
        d[i] += GAMMA * (s[i] + s[next(i)]);
    }
    for i in 0..h {
        s[i] += DELTA * (d[prev(i)] + d[i]);
    }
    for v in s.iter_mut() {
        *v *= K;
    }
    for v in d.iter_mut() {
        *v /= K;
    }
}

fn lift_inverse(x: &mut [f64], scratch: &mut Vec<f64>) {
    let n = x.len();
    let h = n / 2;
    {
        let (s, d) = x.split_at_mut(h);
        let next = |i: usize| if i + 1 == h { 0 } else { i + 1 };
        let prev = |i: usize| if i == 0 { h - 1 } else { i - 1 };
        for v in s.iter_mut() {
            *v /= K;
        }
        for v in d.iter_mut() {
            *v *= K;
        }
        for i in 0..h {
            s[i] -= DELTA * (d[prev(i)] + d[i]);
        }
        for i in 0..h {
            d[i] -= GAMMA * (s[i] + s[next(i)]);
        }
        for i in 0..h {
            s[i] -= BETA * (d[prev(i)] + d[i]);
        }
        for i in 0..h {
            d[i] -= ALPHA * (s[i] + s[next(i)]);
        }
    }
    scratch.clear();
    scratch.extend_from_slice(x);
    for i in 0..h {
        x[2 * i] = scratch[i];
        x[2 * i + 1] = scratch[h + i];
    }
}

/// In-place multi-level analysis of a 1D signal.
pub fn forward_1d(x: &mut [f64], levels: usize) -> Result<()> {
    check_levels(x.len(), levels)?;
    let mut scratch = Vec::with_capacity(x.len());
    let n = x.len();
    for j in 0..levels {
        lift_forward(&mut x[..n >> j], &mut scratch);
    }
    Ok(())
}

/// In-place multi-level synthesis of a 1D coefficient vector.
pub fn inverse_1d(x: &mut [f64], levels: usize) -> Result<()> {
    check_levels(x.len(), levels)?;
    let mut scratch = Vec::with_capacity(x.len());
    let n = x.len();
    for j in (0..levels).rev() {
        lift_inverse(&mut x[..n >> j], &mut scratch);
    }
    Ok(())
}

/// The `n×n` synthesis matrix `W` of the `levels`-level transform, i.e.
/// `x = W·c` inverts [`forward_1d`]. Columns are not normalized.
pub fn synthesis_matrix(n: usize, levels: usize) -> Result<Mat> {
    check_levels(n, levels)?;
    let mut w = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for k in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[k] = 1.0;
        inverse_1d(&mut e, levels)?;
        w.set_col(k, &e);
    }
    Ok(w)
}

/// The level-`j` synthesis wavelet for a periodic signal of length `n`,
/// anchored at detail coefficient 0.
pub fn detail_atom(n: usize, level: usize) -> Result<Vec<f64>> {
    check_levels(n, level)?;
    let mut e = vec![0.0; n];
    e[n >> level] = 1.0;
    inverse_1d(&mut e, level)?;
    Ok(e)
}

/// Separable 2D transform of an image: analysis runs the full 1D transform
/// along every row, then along every column; synthesis undoes both.
/// Equivalent to `X = W₁⁻¹·Z·W₂⁻ᵀ` and `Z = W₁·X·W₂ᵀ` with the synthesis
/// matrices of [`synthesis_matrix`].
pub fn wavelet_2d(image: &Mat, levels: usize, direction: Direction) -> Result<Mat> {
    let (r, c) = image.shape();
    check_levels(r, levels)?;
    check_levels(c, levels)?;
    let step: fn(&mut [f64], usize) -> Result<()> = match direction {
        Direction::Analyze => forward_1d,
        Direction::Synthesize => inverse_1d,
    };
    let mut out = image.clone();
    let along_rows = |m: &mut Mat| -> Result<()> {
        for i in 0..m.rows() {
            step(m.row_mut(i), levels)?;
        }
        Ok(())
    };
    let along_cols = |m: &Mat| -> Result<Mat> {
        let mut t = m.transpose();
        for i in 0..t.rows() {
            step(t.row_mut(i), levels)?;
        }
        Ok(t.transpose())
    };
    match direction {
        Direction::Analyze => {
            along_rows(&mut out)?;
            along_cols(&out)
        }
        Direction::Synthesize => {
            let mut out = along_cols(&out)?;
            along_rows(&mut out)?;
            Ok(out)
        }
    }
}
