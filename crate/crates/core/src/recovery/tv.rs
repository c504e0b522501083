use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::linalg::{CMat, Mat};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvConfig {
    pub max_iters: usize,
    /// Relative objective-change stopping tolerance.
    pub tol: f64,
    /// Dual iterations of the TV proximal step (warm-started).
    pub inner_iters: usize,
}

impl Default for TvConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            tol: 1e-6,
            inner_iters: 20,
        }
    }
}

/// Forward differences with a replicated (zero-gradient) far boundary.
fn gradient(z: &Mat) -> (Mat, Mat) {
    let (r, c) = z.shape();
    let gx = Mat::from_fn(r, c, |i, j| if i + 1 < r { z[(i + 1, j)] - z[(i, j)] } else { 0.0 });
    let gy = Mat::from_fn(r, c, |i, j| if j + 1 < c { z[(i, j + 1)] - z[(i, j)] } else { 0.0 });
    (gx, gy)
}

/// Negative adjoint of [`gradient`].
fn divergence(px: &Mat, py: &Mat) -> Mat {
    let (r, c) = px.shape();
    Mat::from_fn(r, c, |i, j| {
        let dx = match i {
            _ if r == 1 => 0.0,
            0 => px[(0, j)],
            _ if i + 1 == r => -px[(i - 1, j)],
            _ => px[(i, j)] - px[(i - 1, j)],
        };
        let dy = match j {
            _ if c == 1 => 0.0,
            0 => py[(i, 0)],
            _ if j + 1 == c => -py[(i, j - 1)],
            _ => py[(i, j)] - py[(i, j - 1)],
        };
        dx + dy
    })
}

/// Isotropic total variation `Σ √(∂ₓz² + ∂ᵧz²)`.
pub fn total_variation(z: &Mat) -> f64 {
    let (gx, gy) = gradient(z);
    gx.data().iter().zip(gy.data()).map(|(a, b)| a.hypot(*b)).sum()
}

/// Dual projection for `min_Z ½‖Z − V‖² + θ·TV(Z)`, warm-started from `p`.
fn tv_prox(v: &Mat, theta: f64, p: &mut (Mat, Mat), iters: usize) -> Mat {
    if theta == 0.0 {
        return v.clone();
    }
    const TAU: f64 = 0.125;
    let inv = 1.0 / theta;
    for _ in 0..iters {
        let mut w = divergence(&p.0, &p.1);
        w.axpy(-inv, v);
        let (gx, gy) = gradient(&w);
        let (px, py) = (p.0.data_mut(), p.1.data_mut());
        for k in 0..px.len() {
            let denom = 1.0 + TAU * gx.data()[k].hypot(gy.data()[k]);
            px[k] = (px[k] + TAU * gx.data()[k]) / denom;
            py[k] = (py[k] + TAU * gy.data()[k]) / denom;
        }
    }
    let mut out = v.clone();
    out.axpy(-theta, &divergence(&p.0, &p.1));
    out
}

struct Fourier<'a> {
    f1: &'a CMat,
    f2: &'a CMat,
    rows: &'a [bool],
}

impl Fourier<'_> {
    /// `R·F₁·Z·F₂`, with unsampled rows zeroed.
    fn forward(&self, z: &Mat) -> CMat {
        let mut k = self.f1.matmul_real(z).matmul(self.f2);
        self.zero_unsampled(&mut k);
        k
    }

    fn zero_unsampled(&self, k: &mut CMat) {
        for (i, &keep) in self.rows.iter().enumerate() {
            if !keep {
                k.row_mut(i).iter_mut().for_each(|v| *v = Default::default());
            }
        }
    }

    /// `Re(F₁ᴴ·K·F₂ᴴ)`.
    fn adjoint(&self, k: &CMat) -> Mat {
        self.f1.adjoint().matmul(k).matmul(&self.f2.adjoint()).re()
    }
}

/// `‖Y − R·F₁·Z·F₂‖² + λ·TV(Z)`.
pub fn tv_objective(y: &CMat, rows: &[bool], f1: &CMat, f2: &CMat, z: &Mat, lambda: f64) -> f64 {
    let op = Fourier { f1, f2, rows };
    let mut yy = y.clone();
    op.zero_unsampled(&mut yy);
    op.forward(z).sub(&yy).frobenius().powi(2) + lambda * total_variation(z)
}

/// Total-variation reconstruction from row-subsampled 2D k-space:
/// `min_Z ‖Y − R·F₁·Z·F₂‖² + λ·TV(Z)` over real images, by monotone FISTA
/// with an inexact dual TV proximal step. `rows[i]` marks sampled k-space
/// rows; `F₁`, `F₂` are unitary DFT matrices. Starts from the zero-filled
/// image.
pub fn tv_reconstruct(
    y: &CMat,
    rows: &[bool],
    f1: &CMat,
    f2: &CMat,
    lambda: f64,
    cfg: &TvConfig,
) -> Result<RecoveryResult<Mat>> {
    let (n1, n2) = y.shape();
    if rows.len() != n1 || f1.shape() != (n1, n1) || f2.shape() != (n2, n2) {
        return Err(Error::dim(format!(
            "k-space {n1}×{n2} needs {n1} row flags and {n1}×{n1}, {n2}×{n2} transforms"
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Input(format!("λ must be finite and non-negative, got {lambda}")));
    }
    let op = Fourier { f1, f2, rows };
    let mut y = y.clone();
    op.zero_unsampled(&mut y);
    // Unitary transforms and a row projection: the fidelity gradient is
    // 2-Lipschitz.
    let step = 0.5;
    let theta = lambda * step;
    let objective = |k: &CMat, z: &Mat| k.sub(&y).frobenius().powi(2) + lambda * total_variation(z);

    let mut x = op.adjoint(&y);
    let mut kx = op.forward(&x);
    let mut fx = objective(&kx, &x);
    let (mut yk, mut kyk) = (x.clone(), kx.clone());
    let mut dual = (Mat::zeros(n1, n2), Mat::zeros(n1, n2));
    let mut t = 1.0f64;
    let mut trace = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let g = op.adjoint(&kyk.sub(&y)).scale(2.0);
        let mut v = yk.clone();
        v.axpy(-step, &g);
        let zk = tv_prox(&v, theta, &mut dual, cfg.inner_iters);
        let kz = op.forward(&zk);
        let fz = objective(&kz, &zk);
        if !fz.is_finite() {
            return Err(Error::NonFinite(format!("objective diverged at iteration {iterations}")));
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let accepted = fz <= fx;
        let prev_f = fx;
        let (x_prev, kx_prev) = (x.clone(), kx.clone());
        if accepted {
            x = zk.clone();
            kx = kz.clone();
            fx = fz;
        }
        // y = x + (t/t')(z − x) + ((t − 1)/t')(x − x_prev), applied to both
        // the image and its cached k-space so no extra transform is needed.
        let (a, b) = (t / t_next, (t - 1.0) / t_next);
        yk = x.clone();
        yk.axpy(a, &zk.sub(&x));
        yk.axpy(b, &x.sub(&x_prev));
        kyk = kx.add(&kz.sub(&kx).scale(a)).add(&kx.sub(&kx_prev).scale(b));
        t = t_next;
        trace.push(fx);
        if accepted && (prev_f - fx) <= cfg.tol * prev_f.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Ok(RecoveryResult {
        estimate: x,
        residual_trace: trace,
        iterations,
        converged,
    })
}
