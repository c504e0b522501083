use super::RecoveryResult;
use crate::dictionaries::CoeffGrid;
use crate::error::{Error, Result};
use crate::linalg::{CMat, Mat};

/// The separable operator `X ↦ L·X·Rᵀ`.
#[derive(Clone, Debug)]
pub struct LinOp2D {
    pub left: Mat,
    pub right: Mat,
}

impl LinOp2D {
    pub fn new(left: Mat, right: Mat) -> Self {
        Self { left, right }
    }

    /// Coefficient-grid shape accepted by [`apply`](Self::apply).
    pub fn domain(&self) -> (usize, usize) {
        (self.left.cols(), self.right.cols())
    }

    /// Measurement shape produced by [`apply`](Self::apply).
    pub fn range(&self) -> (usize, usize) {
        (self.left.rows(), self.right.rows())
    }

    pub fn apply(&self, x: &Mat) -> Mat {
        self.left.matmul(x).matmul_t(&self.right)
    }

    /// `Y ↦ Lᵀ·Y·R`.
    pub fn adjoint(&self, y: &Mat) -> Mat {
        self.left.t_matmul(y).matmul(&self.right)
    }
}

/// A complex measurement model split into real and imaginary channels that
/// share the real coefficient grid.
#[derive(Clone, Debug)]
pub struct ComplexSplitOp {
    pub real_part: LinOp2D,
    pub imag_part: LinOp2D,
}

impl ComplexSplitOp {
    pub fn apply(&self, x: &Mat) -> CMat {
        CMat::from_parts(&self.real_part.apply(x), &self.imag_part.apply(x))
    }

    fn check(&self, y: &CMat) -> Result<(usize, usize)> {
        let dom = self.real_part.domain();
        if self.imag_part.domain() != dom {
            return Err(Error::dim("real and imaginary channels act on different grids"));
        }
        for (name, op) in [("real", &self.real_part), ("imaginary", &self.imag_part)] {
            if op.range() != y.shape() {
                return Err(Error::dim(format!(
                    "{name} channel maps to {:?}, observation is {:?}",
                    op.range(),
                    y.shape()
                )));
            }
        }
        Ok(dom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FistaConfig {
    pub max_iters: usize,
    /// Relative objective-change stopping tolerance.
    pub tol: f64,
}

impl Default for FistaConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-8,
        }
    }
}

/// Gradient data for the quadratic part. When both channels share the
/// right factor, `½‖Ỹ − 𝒜X‖² = ½⟨X, G_L·X·G_R⟩ − ⟨B, X⟩ + c`, so each
/// gradient costs two small products instead of four operator passes.
struct Quadratic {
    b: Mat,
    gram: Option<(Mat, Mat)>,
}

impl Quadratic {
    fn new(op: &ComplexSplitOp, y: &CMat) -> Self {
        let b = op.real_part.adjoint(&y.re()).add(&op.imag_part.adjoint(&y.im()));
        let gram = (op.real_part.right == op.imag_part.right).then(|| {
            let gl = op.real_part.left.t_matmul(&op.real_part.left);
            let gl = gl.add(&op.imag_part.left.t_matmul(&op.imag_part.left));
            (gl, op.real_part.right.t_matmul(&op.real_part.right))
        });
        Self { b, gram }
    }

    fn grad(&self, op: &ComplexSplitOp, x: &Mat) -> Mat {
        match &self.gram {
            Some((gl, gr)) => gl.matmul(x).matmul(gr).sub(&self.b),
            None => {
                let gr = op.real_part.adjoint(&op.real_part.apply(x));
                let gi = op.imag_part.adjoint(&op.imag_part.apply(x));
                gr.add(&gi).sub(&self.b)
            }
        }
    }

    fn lipschitz(&self, op: &ComplexSplitOp) -> f64 {
        let gram_bound = |m: &Mat| spectral_bound(&m.t_matmul(m));
        match &self.gram {
            Some((gl, gr)) => spectral_bound(gl) * spectral_bound(gr),
            None => {
                gram_bound(&op.real_part.left) * gram_bound(&op.real_part.right)
                    + gram_bound(&op.imag_part.left) * gram_bound(&op.imag_part.right)
            }
        }
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn weighted_l1(x: &Mat, mask: &[bool]) -> f64 {
    x.data()
        .iter()
        .zip(mask)
        .filter(|(_, &h)| h)
        .map(|(v, _)| v.abs())
        .sum()
}

/// `½‖Re Ỹ − 𝒜_R X‖² + ½‖Im Ỹ − 𝒜_I X‖² + γ‖X_H‖₁`, evaluated directly.
pub fn weighted_l1_objective(op: &ComplexSplitOp, y: &CMat, x: &Mat, gamma: f64, highpass_mask: &[bool]) -> f64 {
    let r = op.real_part.apply(x).sub(&y.re());
    let i = op.imag_part.apply(x).sub(&y.im());
    0.5 * (r.frobenius().powi(2) + i.frobenius().powi(2)) + gamma * weighted_l1(x, highpass_mask)
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn spectral_bound(m: &Mat) -> f64 {
    let n = m.rows();
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618).fract()).collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = m.matvec(&v);
        let norm = crate::linalg::norm2(&w);
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / crate::linalg::norm2(&v);
        v = w.iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-10 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// Accelerated proximal gradient for
/// `min_X ½‖Re Ỹ − 𝒜_R X‖² + ½‖Im Ỹ − 𝒜_I X‖² + γ‖X_H‖₁`
/// where `X_H` are the entries flagged by `highpass_mask` (row-major).
///
/// The step is `1/L` with `L` from power iteration on the Gram factors;
/// momentum restarts whenever the objective increases, so the accepted
/// iterates are monotone. Starts from zero.
pub fn fista_weighted_l1(
    op: &ComplexSplitOp,
    y: &CMat,
    gamma: f64,
    highpass_mask: &[bool],
    cfg: &FistaConfig,
) -> Result<RecoveryResult<CoeffGrid>> {
    let (n1, n2) = op.check(y)?;
    if highpass_mask.len() != n1 * n2 {
        return Err(Error::dim(format!(
            "mask has {} entries for a {n1}×{n2} grid",
            highpass_mask.len()
        )));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Input(format!("γ must be a finite non-negative number, got {gamma}")));
    }
    if !y.data().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite("observation contains non-finite entries".into()));
    }
    let q = Quadratic::new(op, y);
    let grad = |x: &Mat| q.grad(op, x);
    let objective = |x: &Mat| weighted_l1_objective(op, y, x, gamma, highpass_mask);
    let lipschitz = q.lipschitz(op);
    let mut x = Mat::zeros(n1, n2);
    if lipschitz == 0.0 {
        return Ok(RecoveryResult {
            estimate: CoeffGrid {
                x,
                highpass_mask: highpass_mask.to_vec(),
            },
            residual_trace: vec![objective(&Mat::zeros(n1, n2))],
            iterations: 0,
            converged: true,
        });
    }
    let mut step_l = lipschitz * 1.0001;
    let prox_step = |point: &Mat, l: f64| -> Mat {
        let g = grad(point);
        let mut out = point.clone();
        out.axpy(-1.0 / l, &g);
        let t = gamma / l;
        for (v, &h) in out.data_mut().iter_mut().zip(highpass_mask) {
            if h {
                *v = soft_threshold(*v, t);
            }
        }
        out
    };
    let mut f_x = objective(&x);
    let mut yk = x.clone();
    let mut t = 1.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut cand = prox_step(&yk, step_l);
        let mut f_c = objective(&cand);
        if f_c > f_x {
            // Restart from the last accepted iterate; a plain proximal step
            // from there cannot increase the objective.
            t = 1.0;
            cand = prox_step(&x, step_l);
            f_c = objective(&cand);
            let mut tries = 0;
            while !(f_c <= f_x) && tries < 30 {
                step_l *= 2.0;
                cand = prox_step(&x, step_l);
                f_c = objective(&cand);
                tries += 1;
            }
            if !f_c.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective diverged at iteration {iterations}"
                )));
            }
            if f_c > f_x {
                cand = x.clone();
                f_c = f_x;
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut y_next = cand.clone();
        y_next.axpy((t - 1.0) / t_next, &cand.sub(&x));
        let change = (f_x - f_c).abs();
        x = cand;
        yk = y_next;
        t = t_next;
        let prev = f_x;
        f_x = f_c;
        trace.push(f_x);
        if change <= cfg.tol * prev.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Ok(RecoveryResult {
        estimate: CoeffGrid {
            x,
            highpass_mask: highpass_mask.to_vec(),
        },
        residual_trace: trace,
        iterations,
        converged,
    })
}
