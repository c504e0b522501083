//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! Tall inputs are first reduced by a Householder QR so the rotations act on
//! a square triangular factor; wide inputs are handled through the transpose.

use super::decomp::{householder_qr, orthonormal_completion};
use super::{dot, Mat};

/// `M = U·Σ·Vᵀ` with full square `U` (rows×rows) and `V` (cols×cols).
/// `s` holds the `min(rows, cols)` singular values in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.s.iter().filter(|&&s| s > tol).count()
    }

    /// Reassembles `U·Σ·Vᵀ`.
    pub fn reconstruct(&self) -> Mat {
        let (r, c) = (self.u.rows(), self.v.rows());
        let p = self.s.len();
        let us = self.u.col_range(0, p).scale_columns(&self.s);
        let out = us.matmul_t(&self.v.col_range(0, p));
        debug_assert_eq!(out.shape(), (r, c));
        out
    }
}

/// Full SVD of any finite matrix.
pub fn svd(m: &Mat) -> Svd {
    let (r, c) = m.shape();
    if r < c {
        let t = svd(&m.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    if c == 0 {
        return Svd {
            u: Mat::identity(r),
            s: Vec::new(),
            v: Mat::zeros(0, 0),
        };
    }
    let (q, rfull) = householder_qr(m);
    let r1 = rfull.submatrix(0, 0, c, c);
    let (s, u1, v) = jacobi_square(&r1);
    // U = Q · blockdiag(U1, I).
    let mut u = q.clone();
    let qc = q.col_range(0, c).matmul(&u1);
    for i in 0..r {
        u.row_mut(i)[..c].copy_from_slice(qc.row(i));
    }
    Svd { u, s, v }
}

/// One-sided Jacobi on a square matrix. Returns (σ descending, U, V).
fn jacobi_square(a: &Mat) -> (Vec<f64>, Mat, Mat) {
    let n = a.cols();
    // Columns of A held as rows so rotations touch contiguous memory.
    let mut w = a.transpose();
    let mut vt = Mat::identity(n);
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        // Squared column norms, refreshed every sweep and updated exactly
        // through each rotation in between.
        let mut sq: Vec<f64> = (0..n).map(|i| dot(w.row(i), w.row(i))).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let (alpha, beta) = (sq[i], sq[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(w.row(i), w.row(j));
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_rows(&mut w, i, j, cs, sn);
                rotate_rows(&mut vt, i, j, cs, sn);
                sq[i] = (alpha - t * gamma).max(0.0);
                sq[j] = beta + t * gamma;
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|i| dot(w.row(i), w.row(i)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let smax = s[0];
    let cutoff = (n as f64) * eps * smax;

    let good: Vec<usize> = (0..n).filter(|&k| s[k] > cutoff && s[k] > 0.0).collect();
    let mut u = Mat::zeros(n, n);
    for &k in &good {
        let src = w.row(order[k]);
        for i in 0..n {
            u[(i, k)] = src[i] / s[k];
        }
    }
    if good.len() < n {
        let basis = u.select_cols(&good);
        let extra = orthonormal_completion(&basis);
        for (e, k) in (good.len()..n).enumerate() {
            u.set_col(k, &extra.col(e));
        }
    }
    let v = Mat::from_fn(n, n, |i, k| vt[(order[k], i)]);
    (s, u, v)
}

fn rotate_rows(m: &mut Mat, i: usize, j: usize, c: f64, s: f64) {
    let n = m.cols();
    let data = m.data_mut();
    let (lo, hi) = data.split_at_mut(j * n);
    let ri = &mut lo[i * n..(i + 1) * n];
    let rj = &mut hi[..n];
    for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}
