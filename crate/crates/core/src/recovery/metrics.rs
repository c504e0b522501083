use crate::error::{Error, Result};
use crate::linalg::Mat;

fn check_pair(reference: &Mat, test: &Mat, peak: f64) -> Result<()> {
    if reference.shape() != test.shape() {
        return Err(Error::dim(format!(
            "images differ in shape: {:?} vs {:?}",
            reference.shape(),
            test.shape()
        )));
    }
    if reference.rows() == 0 || reference.cols() == 0 {
        return Err(Error::Input("images are empty".into()));
    }
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::Input(format!("peak must be positive, got {peak}")));
    }
    if !reference.is_finite() || !test.is_finite() {
        return Err(Error::NonFinite("image contains non-finite pixels".into()));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB, `+∞` for identical images.
pub fn psnr(reference: &Mat, test: &Mat, peak: f64) -> Result<f64> {
    check_pair(reference, test, peak)?;
    let n = (reference.rows() * reference.cols()) as f64;
    let mse = reference.sub(test).frobenius().powi(2) / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let w: Vec<f64> = (0..size).map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering with a normalized 1D window.
fn filter_valid(m: &Mat, w: &[f64]) -> Mat {
    let k = w.len();
    let (r, c) = m.shape();
    let rows = Mat::from_fn(r, c + 1 - k, |i, j| (0..k).map(|t| w[t] * m[(i, j + t)]).sum());
    Mat::from_fn(r + 1 - k, c + 1 - k, |i, j| (0..k).map(|t| w[t] * rows[(i + t, j)]).sum())
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5)
/// evaluated at every fully contained window position. Images smaller than
/// 11 pixels use the largest odd window that fits, with the same σ.
pub fn ssim(reference: &Mat, test: &Mat, peak: f64) -> Result<f64> {
    check_pair(reference, test, peak)?;
    let fit = reference.rows().min(reference.cols());
    let size = if fit >= 11 { 11 } else if fit % 2 == 1 { fit } else { fit - 1 };
    let w = gaussian_window(size, 1.5);
    let c1 = (0.01 * peak).powi(2);
    let c2 = (0.03 * peak).powi(2);
    let mu_x = filter_valid(reference, &w);
    let mu_y = filter_valid(test, &w);
    let xx = filter_valid(&reference.hadamard(reference), &w);
    let yy = filter_valid(&test.hadamard(test), &w);
    let xy = filter_valid(&reference.hadamard(test), &w);
    let mut total = 0.0;
    let count = mu_x.data().len();
    for k in 0..count {
        let (mx, my) = (mu_x.data()[k], mu_y.data()[k]);
        let sx = xx.data()[k] - mx * mx;
        let sy = yy.data()[k] - my * my;
        let sxy = xy.data()[k] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2));
    }
    Ok(total / count as f64)
}
