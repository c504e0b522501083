//! Decompositions built on the SVD and on Householder reflections:
//! QR, pseudo-inverse, nullspace, orthonormal completion, inverse.

use super::{dot, svd, sym_eig, Mat, Svd};
use crate::error::{Error, Result};

/// Numerical-rank threshold `max(rows, cols)·ε·σ_max`.
pub fn default_rank_tol(m: &Mat, sigma_max: f64) -> f64 {
    (m.rows().max(m.cols()) as f64) * f64::EPSILON * sigma_max
}

/// Householder QR: `M = Q·R` with `Q` square orthogonal and `R` upper
/// trapezoidal of the same shape as `M`.
pub fn householder_qr(m: &Mat) -> (Mat, Mat) {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut reflectors: Vec<(usize, Vec<f64>)> = Vec::new();
    for k in 0..c.min(r.saturating_sub(1)) {
        let mut v: Vec<f64> = (k..r).map(|i| a[(i, k)]).collect();
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in &mut v {
            *x /= vnorm;
        }
        reflect_rows(&mut a, k, &v, k);
        for i in (k + 1)..r {
            a[(i, k)] = 0.0;
        }
        reflectors.push((k, v));
    }
    let mut q = Mat::identity(r);
    for (k, v) in reflectors.iter().rev() {
        reflect_rows(&mut q, *k, v, 0);
    }
    (q, a)
}

/// Applies `I − 2vvᵀ` to rows `k..` of `m`, columns `c0..`.
fn reflect_rows(m: &mut Mat, k: usize, v: &[f64], c0: usize) {
    let cols = m.cols();
    let mut w = vec![0.0; cols - c0];
    for (t, &vt) in v.iter().enumerate() {
        let row = &m.row(k + t)[c0..];
        for (wj, &x) in w.iter_mut().zip(row) {
            *wj += vt * x;
        }
    }
    for (t, &vt) in v.iter().enumerate() {
        let row = &mut m.row_mut(k + t)[c0..];
        for (x, &wj) in row.iter_mut().zip(&w) {
            *x -= 2.0 * vt * wj;
        }
    }
}

/// Orthonormal columns spanning the orthogonal complement of `range(B)`,
/// assuming `B` has full column rank.
pub fn orthonormal_completion(b: &Mat) -> Mat {
    let (r, c) = b.shape();
    if c >= r {
        return Mat::zeros(r, 0);
    }
    let (q, _) = householder_qr(b);
    q.col_range(c, r)
}

/// Moore–Penrose pseudo-inverse; `rank_tol = None` selects the default.
pub fn pinv(m: &Mat, rank_tol: Option<f64>) -> Mat {
    let d = svd(m);
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(m, d.sigma_max()));
    pinv_from_svd(&d, d.rank(tol))
}

/// Pseudo-inverse from an existing SVD, keeping the leading `k` values.
pub fn pinv_from_svd(d: &Svd, k: usize) -> Mat {
    if k == 0 {
        return Mat::zeros(d.v.rows(), d.u.rows());
    }
    let inv: Vec<f64> = d.s[..k].iter().map(|s| 1.0 / s).collect();
    d.v.col_range(0, k)
        .scale_columns(&inv)
        .matmul_t(&d.u.col_range(0, k))
}

/// Numerical rank with the default or given tolerance.
pub fn rank(m: &Mat, rank_tol: Option<f64>) -> usize {
    let d = svd(m);
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(m, d.sigma_max()));
    d.rank(tol)
}

/// Orthonormal basis of `ker(M)` as columns (`cols − rank` of them). Each
/// column is signed so its first clearly nonzero component is positive.
pub fn nullspace_basis(m: &Mat, rank_tol: Option<f64>) -> Mat {
    let d = svd(m);
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(m, d.sigma_max()));
    kernel_from_svd(&d, d.rank(tol))
}

/// Kernel basis from an existing SVD of numerical rank `k`, signed as in
/// [`nullspace_basis`].
pub fn kernel_from_svd(d: &Svd, k: usize) -> Mat {
    let c = d.v.rows();
    let mut n = d.v.col_range(k, c);
    for j in 0..n.cols() {
        let col = n.col(j);
        let pivot = col.iter().copied().find(|x| x.abs() > 1e-12);
        if pivot.is_some_and(|p| p < 0.0) {
            let flipped: Vec<f64> = col.iter().map(|x| -x).collect();
            n.set_col(j, &flipped);
        }
    }
    n
}

/// Extends a full-column-rank `B` to a square invertible matrix whose
/// leading columns are `B` and whose appended columns are an orthonormal
/// basis of `range(B)`'s complement.
pub fn complete_to_invertible(b: &Mat) -> Result<Mat> {
    let (r, c) = b.shape();
    if r < c {
        return Err(Error::dim(format!(
            "cannot complete a {r}×{c} matrix with more columns than rows"
        )));
    }
    let d = svd(b);
    let tol = default_rank_tol(b, d.sigma_max());
    let k = d.rank(tol);
    if k < c {
        return Err(Error::RankDeficient(format!(
            "columns are dependent (rank {k} < {c})"
        )));
    }
    Ok(b.hstack(&orthonormal_completion(b)))
}

/// 2-norm condition number `σ_max/σ_min` (infinite when singular).
pub fn cond(m: &Mat) -> f64 {
    let d = svd(m);
    let smin = d.sigma_min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        d.sigma_max() / smin
    }
}

/// Inverse of a square matrix by Gauss–Jordan elimination with partial
/// pivoting.
pub fn inverse(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "inverse needs a square matrix, got {}×{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Mat::identity(n);
    let scale = m.max_abs();
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[(i, k)].abs() > a[(piv, k)].abs() {
                piv = i;
            }
        }
        let p = a[(piv, k)];
        if p.abs() <= (n as f64) * f64::EPSILON * scale || p == 0.0 {
            return Err(Error::Singular(format!("zero pivot in column {k}")));
        }
        if piv != k {
            swap_rows(&mut a, piv, k);
            swap_rows(&mut inv, piv, k);
        }
        let rp = 1.0 / p;
        for x in a.row_mut(k) {
            *x *= rp;
        }
        for x in inv.row_mut(k) {
            *x *= rp;
        }
        let ak = a.row(k).to_vec();
        let ik = inv.row(k).to_vec();
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[(i, k)];
            if f == 0.0 {
                continue;
            }
            for (x, y) in a.row_mut(i).iter_mut().zip(&ak) {
                *x -= f * y;
            }
            for (x, y) in inv.row_mut(i).iter_mut().zip(&ik) {
                *x -= f * y;
            }
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut Mat, i: usize, j: usize) {
    let n = m.cols();
    let (lo, hi) = m.data_mut().split_at_mut(i.max(j) * n);
    let a = i.min(j);
    lo[a * n..(a + 1) * n].swap_with_slice(&mut hi[..n]);
}

/// `M^{-1/2}` of a symmetric positive definite matrix.
pub fn sym_inv_sqrt(m: &Mat) -> Result<Mat> {
    let e = sym_eig(m)?;
    let lmax = e.eigenvalues.first().copied().unwrap_or(0.0);
    if e
        .eigenvalues
        .iter()
        .any(|&l| l <= (m.rows() as f64) * f64::EPSILON * lmax.abs())
    {
        return Err(Error::Singular(
            "matrix is not positive definite".to_string(),
        ));
    }
    Ok(e.apply_fn(|l| 1.0 / l.sqrt()))
}
