use num_complex::Complex64;
use std::f64::consts::PI;

use super::CMat;

/// Unitary DFT matrix with entries `n^{-1/2}·exp(−2πi·jk/n)`.
pub fn dft_matrix(n: usize) -> CMat {
    assert!(n >= 1, "DFT size must be positive");
    let scale = 1.0 / (n as f64).sqrt();
    // Reduce jk mod n before the trig call to keep large products accurate.
    let table: Vec<Complex64> = (0..n)
        .map(|t| Complex64::from_polar(scale, -2.0 * PI * t as f64 / n as f64))
        .collect();
    CMat::from_fn(n, n, |j, k| table[(j * k) % n])
}
