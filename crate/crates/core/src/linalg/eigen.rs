//! Symmetric eigendecomposition.
//!
//! Two algorithms are provided: cyclic Jacobi rotations, which are simple and
//! accurate to high relative precision, and Householder tridiagonalization
//! followed by implicit QL, which is several times faster on the larger
//! operands produced by the MRI factor fitting.

use super::Mat;
use crate::error::{Error, Result};

/// `M = Q·diag(eigenvalues)·Qᵀ` with eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub q: Mat,
    pub eigenvalues: Vec<f64>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q·diag(f(λ))·Qᵀ`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat {
        let scaled = self
            .q
            .scale_columns(&self.eigenvalues.iter().map(|&l| f(l)).collect::<Vec<_>>());
        scaled.matmul_t(&self.q)
    }

    pub fn reconstruct(&self) -> Mat {
        self.apply_fn(|l| l)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigenMethod {
    /// Jacobi up to 64×64, tridiagonal QL above.
    #[default]
    Auto,
    Jacobi,
    TridiagonalQl,
}

const AUTO_JACOBI_LIMIT: usize = 64;

/// Symmetric eigendecomposition with the default method.
pub fn sym_eig(m: &Mat) -> Result<SpectralDecomp> {
    sym_eig_with(m, EigenMethod::Auto)
}

pub fn sym_eig_with(m: &Mat, method: EigenMethod) -> Result<SpectralDecomp> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "eigendecomposition needs a square matrix, got {}×{}",
            m.rows(),
            m.cols()
        )));
    }
    let norm = m.frobenius();
    let asym = m.asymmetry();
    let tol = 1e-10 * norm;
    if asym > tol {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            tolerance: tol,
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(SpectralDecomp {
            q: Mat::zeros(0, 0),
            eigenvalues: Vec::new(),
        });
    }
    let sym = m.symmetrize();
    let (values, vectors_rows) = match method {
        EigenMethod::Jacobi => jacobi(&sym),
        EigenMethod::TridiagonalQl => tridiagonal_ql(&sym),
        EigenMethod::Auto if n <= AUTO_JACOBI_LIMIT => jacobi(&sym),
        EigenMethod::Auto => tridiagonal_ql(&sym),
    };
    Ok(sorted_descending(values, vectors_rows))
}

/// Sorts eigenpairs; `vectors_rows` holds one eigenvector per row.
fn sorted_descending(values: Vec<f64>, vectors_rows: Mat) -> SpectralDecomp {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let q = Mat::from_fn(n, n, |i, j| vectors_rows[(order[j], i)]);
    SpectralDecomp { q, eigenvalues }
}

/// Cyclic Jacobi. Returns eigenvalues and eigenvectors stored as rows.
fn jacobi(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.rows();
    let mut a = m.clone();
    // Eigenvectors as rows so each rotation touches two contiguous rows.
    let mut vt = Mat::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← Jᵀ A J with J the (p, q) rotation.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                {
                    let data = a.data_mut();
                    for k in 0..n {
                        let apk = data[p * n + k];
                        let aqk = data[q * n + k];
                        data[p * n + k] = c * apk - s * aqk;
                        data[q * n + k] = s * apk + c * aqk;
                    }
                }
                let data = vt.data_mut();
                for k in 0..n {
                    let vp = data[p * n + k];
                    let vq = data[q * n + k];
                    data[p * n + k] = c * vp - s * vq;
                    data[q * n + k] = s * vp + c * vq;
                }
            }
        }
    }
    (a.diagonal(), vt)
}

/// Householder tridiagonalization (tred2) followed by implicit QL (tql2).
/// Returns eigenvalues and eigenvectors stored as rows.
fn tridiagonal_ql(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.rows();
    let mut v = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;

    // QL works column-wise on V; keep the transpose so rotations hit rows.
    let mut vt = v.transpose();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m_idx = l;
        while m_idx < n {
            if e[m_idx].abs() <= eps * tst1 {
                break;
            }
            m_idx += 1;
        }
        if m_idx > l {
            for _iter in 0..200 {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m_idx];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m_idx).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let data = vt.data_mut();
                    let (lo, hi) = data.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_i1 = &mut hi[..n];
                    for (vi, vi1) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                        let hv = *vi1;
                        *vi1 = s * *vi + c * hv;
                        *vi = c * *vi - s * hv;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    (d, vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, seed: u64) -> Mat {
        let mut rng = Seed(seed).stream(0);
        let b = Mat::from_fn(n, n, |_, _| rng.normal());
        b.add(&b.transpose())
    }

    fn check(m: &Mat, dec: &SpectralDecomp) {
        let n = m.rows();
        assert!(dec.q.orthonormal_columns_defect() <= 1e-10 * n as f64);
        let res = dec.reconstruct().sub(m).frobenius();
        assert!(res <= 1e-8 * m.frobenius().max(1e-300), "residual {res}");
        for w in dec.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let d = sym_eig(&Mat::identity(3)).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 1.0, 1.0]);
        let d = sym_eig(&Mat::diag(&[1.0, 4.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![4.0, 1.0]);
        assert!((d.q[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_matches_characteristic_roots() {
        // [[a, b], [b, c]]: roots of λ² − (a+c)λ + (ac − b²).
        let (a, b, c): (f64, f64, f64) = (2.5, -1.25, 0.75);
        let tr = a + c;
        let det = a * c - b * b;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let expected = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        for method in [EigenMethod::Jacobi, EigenMethod::TridiagonalQl] {
            let d = sym_eig_with(&Mat::from_rows(&[&[a, b], &[b, c]]), method).unwrap();
            for (x, y) in d.eigenvalues.iter().zip(expected) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn three_by_three_eigenvalues_are_characteristic_roots() {
        let m = random_symmetric(3, 11);
        let d = sym_eig(&m).unwrap();
        // det(M − λI) evaluated directly by cofactor expansion.
        let det_shift = |l: f64| {
            let s = m.add_identity(-l);
            s[(0, 0)] * (s[(1, 1)] * s[(2, 2)] - s[(1, 2)] * s[(2, 1)])
                - s[(0, 1)] * (s[(1, 0)] * s[(2, 2)] - s[(1, 2)] * s[(2, 0)])
                + s[(0, 2)] * (s[(1, 0)] * s[(2, 1)] - s[(1, 1)] * s[(2, 0)])
        };
        let scale = m.frobenius().powi(3);
        for l in d.eigenvalues {
            assert!(det_shift(l).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn random_eight_by_eight_reconstructs() {
        let m = random_symmetric(8, 3);
        for method in [EigenMethod::Jacobi, EigenMethod::TridiagonalQl] {
            check(&m, &sym_eig_with(&m, method).unwrap());
        }
    }

    #[test]
    fn methods_agree_on_eigenvalues() {
        let m = random_symmetric(40, 5);
        let a = sym_eig_with(&m, EigenMethod::Jacobi).unwrap();
        let b = sym_eig_with(&m, EigenMethod::TridiagonalQl).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-10 * m.frobenius());
        }
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric { .. })));
        assert!(matches!(sym_eig(&Mat::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn repeated_and_zero_eigenvalues() {
        let u = random_symmetric(6, 9);
        let q = sym_eig(&u).unwrap().q;
        let m = q.scale_columns(&[3.0, 3.0, 0.0, 0.0, 0.0, -1.0]).matmul_t(&q);
        for method in [EigenMethod::Jacobi, EigenMethod::TridiagonalQl] {
            let d = sym_eig_with(&m, method).unwrap();
            check(&m, &d);
            assert!((d.eigenvalues[0] - 3.0).abs() < 1e-12);
            assert!(d.eigenvalues[3].abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reconstruction_holds_up_to_64(n in 1usize..=64, seed in any::<u64>()) {
            let m = random_symmetric(n, seed);
            check(&m, &sym_eig(&m).unwrap());
            check(&m, &sym_eig_with(&m, EigenMethod::TridiagonalQl).unwrap());
        }
    }
}
