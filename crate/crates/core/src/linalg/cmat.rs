use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use super::Mat;
use crate::error::{Error, Result};

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "data length {} does not match {rows}×{cols}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("complex matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    pub fn from_real(m: &Mat) -> Self {
        Self::from_raw(
            m.rows(),
            m.cols(),
            m.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn from_parts(re: &Mat, im: &Mat) -> Self {
        assert_eq!(re.shape(), im.shape());
        Self::from_raw(
            re.rows(),
            re.cols(),
            re.data()
                .iter()
                .zip(im.data())
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn re(&self) -> Mat {
        Mat::from_raw(self.rows, self.cols, self.data.iter().map(|z| z.re).collect())
    }

    pub fn im(&self) -> Mat {
        Mat::from_raw(self.rows, self.cols, self.data.iter().map(|z| z.im).collect())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }

    /// Conjugate transpose `Mᴴ`.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "complex matmul shape mismatch");
        let n = rhs.cols;
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * n];
        for i in 0..self.rows {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                let b_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        CMat::from_raw(self.rows, n, out)
    }

    /// `self · rhs` with a real right factor.
    pub fn matmul_real(&self, rhs: &Mat) -> CMat {
        assert_eq!(self.cols, rhs.rows(), "complex·real shape mismatch");
        let re = self.re().matmul(rhs);
        let im = self.im().matmul(rhs);
        CMat::from_parts(&re, &im)
    }

    /// `lhs · self` with a real left factor.
    pub fn real_matmul(lhs: &Mat, rhs: &CMat) -> CMat {
        assert_eq!(lhs.cols(), rhs.rows, "real·complex shape mismatch");
        let re = lhs.matmul(&rhs.re());
        let im = lhs.matmul(&rhs.im());
        CMat::from_parts(&re, &im)
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape());
        CMat::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape());
        CMat::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies row `i` by `weights[i]` (a diagonal left factor).
    pub fn scale_rows(&self, weights: &[f64]) -> CMat {
        assert_eq!(weights.len(), self.rows);
        let mut out = self.clone();
        for (i, w) in weights.iter().enumerate() {
            for z in out.row_mut(i) {
                *z *= w;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_and_complex_products_agree() {
        let a = CMat::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let b = Mat::from_fn(3, 2, |i, j| (i + 2 * j) as f64);
        let lhs = a.matmul_real(&b);
        let rhs = a.matmul(&CMat::from_real(&b));
        assert!(lhs.sub(&rhs).frobenius() < 1e-14);
        let c = Mat::from_fn(4, 2, |i, j| i as f64 - j as f64);
        let l2 = CMat::real_matmul(&c, &a);
        assert!(l2.sub(&CMat::from_real(&c).matmul(&a)).frobenius() < 1e-14);
    }

    #[test]
    fn adjoint_conjugates() {
        let a = CMat::from_fn(2, 2, |i, j| Complex64::new(1.0, (i * 2 + j) as f64));
        assert_eq!(a.adjoint()[(1, 0)], Complex64::new(1.0, -1.0));
    }
}
