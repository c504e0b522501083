use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Vectorized, zero-mean image patches, one per column.
#[derive(Clone, Debug)]
pub struct PatchSet {
    pub patches: Mat,
    pub patch_dims: (usize, usize),
    pub stride: (usize, usize),
}

impl PatchSet {
    pub fn count(&self) -> usize {
        self.patches.cols()
    }
}

/// Extracts every `h×w` patch on a `stride` grid, vectorizes it row by row
/// and subtracts its mean.
pub fn extract_patches(image: &Mat, patch_dims: (usize, usize), stride: (usize, usize)) -> Result<PatchSet> {
    let (rows, cols) = image.shape();
    let (h, w) = patch_dims;
    let (s1, s2) = stride;
    if h == 0 || w == 0 || h > rows || w > cols {
        return Err(Error::dim(format!(
            "{h}×{w} patches do not fit a {rows}×{cols} image"
        )));
    }
    if s1 == 0 || s2 == 0 {
        return Err(Error::Input("stride must be at least 1".into()));
    }
    let ny = (rows - h) / s1 + 1;
    let nx = (cols - w) / s2 + 1;
    let mut out = Mat::zeros(h * w, ny * nx);
    let mut buf = vec![0.0; h * w];
    for py in 0..ny {
        for px in 0..nx {
            for i in 0..h {
                let src = &image.row(py * s1 + i)[px * s2..px * s2 + w];
                buf[i * w..(i + 1) * w].copy_from_slice(src);
            }
            let mean = buf.iter().sum::<f64>() / buf.len() as f64;
            buf.iter_mut().for_each(|v| *v -= mean);
            out.set_col(py * nx + px, &buf);
        }
    }
    Ok(PatchSet {
        patches: out,
        patch_dims,
        stride,
    })
}
