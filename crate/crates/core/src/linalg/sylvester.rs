//! Solvers for the Sylvester equation `P·X + X·Q + C = 0`.

use super::{sym_eig, Mat};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SylvesterMethod {
    /// Diagonalize symmetric `P` and `Q`; exact up to rounding.
    Spectral,
    /// Conjugate gradient on the normal equations of `X ↦ PX + XQ`.
    Krylov,
}

/// `‖PX + XQ + C‖_F`.
pub fn sylvester_residual(p: &Mat, q: &Mat, c: &Mat, x: &Mat) -> f64 {
    let mut r = p.matmul(x);
    r.axpy(1.0, &x.matmul(q));
    r.axpy(1.0, c);
    r.frobenius()
}

/// Solves `P·X + X·Q + C = 0`.
///
/// `tol` is relative: the spectral path reports a singular pencil when some
/// `λ_i(P) + λ_j(Q)` falls within `tol·(‖P‖_F + ‖Q‖_F)` of zero, and the
/// Krylov path iterates until
/// `‖PX + XQ + C‖ ≤ tol·(‖P‖_F + ‖Q‖_F)·‖X‖_F + tol·‖C‖_F`.
pub fn solve_sylvester(p: &Mat, q: &Mat, c: &Mat, method: SylvesterMethod, tol: f64) -> Result<Mat> {
    if !p.is_square() || !q.is_square() || c.shape() != (p.rows(), q.rows()) {
        return Err(Error::dim(format!(
            "Sylvester shapes P {:?}, Q {:?}, C {:?}",
            p.shape(),
            q.shape(),
            c.shape()
        )));
    }
    match method {
        SylvesterMethod::Spectral => spectral(p, q, c, tol),
        SylvesterMethod::Krylov => krylov(p, q, c, tol),
    }
}

fn spectral(p: &Mat, q: &Mat, c: &Mat, tol: f64) -> Result<Mat> {
    let ep = sym_eig(p)?;
    let eq = sym_eig(q)?;
    let scale = p.frobenius() + q.frobenius();
    let guard = (tol * scale).max(f64::MIN_POSITIVE);
    let mut ct = ep.q.t_matmul(c).matmul(&eq.q);
    for (i, li) in ep.eigenvalues.iter().enumerate() {
        let row = ct.row_mut(i);
        for (x, mj) in row.iter_mut().zip(&eq.eigenvalues) {
            let denom = li + mj;
            if denom.abs() <= guard {
                return Err(Error::Singular(format!(
                    "eigenvalues {li:.3e} of P and {mj:.3e} of Q cancel"
                )));
            }
            *x = -*x / denom;
        }
    }
    Ok(ep.q.matmul(&ct).matmul_t(&eq.q))
}

fn krylov(p: &Mat, q: &Mat, c: &Mat, tol: f64) -> Result<Mat> {
    let op = |x: &Mat| {
        let mut y = p.matmul(x);
        y.axpy(1.0, &x.matmul(q));
        y
    };
    let adj = |r: &Mat| {
        let mut y = p.t_matmul(r);
        y.axpy(1.0, &r.matmul_t(q));
        y
    };
    let scale = p.frobenius() + q.frobenius();
    let cn = c.frobenius();
    let mut x = Mat::zeros(c.rows(), c.cols());
    if cn == 0.0 {
        return Ok(x);
    }
    // CGNR on AᵀA x = −Aᵀc.
    let mut r = c.scale(-1.0);
    let mut z = adj(&r);
    let mut d = z.clone();
    let mut zz = z.inner(&z);
    let max_iters = 20 * c.rows() * c.cols() + 100;
    for _ in 0..max_iters {
        if r.frobenius() <= tol * scale * x.frobenius() + tol * cn {
            return Ok(x);
        }
        let ad = op(&d);
        let denom = ad.inner(&ad);
        if denom <= 0.0 || zz == 0.0 {
            break;
        }
        let alpha = zz / denom;
        x.axpy(alpha, &d);
        r.axpy(-alpha, &ad);
        z = adj(&r);
        let zz_new = z.inner(&z);
        let beta = zz_new / zz;
        zz = zz_new;
        d = z.add(&d.scale(beta));
    }
    let res = r.frobenius();
    if res <= tol * scale * x.frobenius() + tol * cn {
        Ok(x)
    } else {
        Err(Error::Singular(format!(
            "Krylov Sylvester solve stalled at residual {res:.3e}"
        )))
    }
}
