use serde::{Deserialize, Serialize};

use super::lagrangian::{GState, HState, L1Data, L2Data, Stationarity};
use super::mask::AccelMask;
use crate::error::{Error, Result};
use crate::linalg::{solve_sylvester, svd, Mat, SylvesterMethod};

/// Outer-loop budget and sub-solver choice for the augmented-Lagrangian fits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmConfig {
    pub max_outer: usize,
    /// Stop when the summed invertibility residuals fall to this value.
    pub tol: f64,
    pub method: SylvesterMethod,
    /// Relative tolerance handed to the Sylvester solver.
    pub sylvester_tol: f64,
}

impl Default for AlmConfig {
    fn default() -> Self {
        Self {
            max_outer: 300,
            tol: 1e-6,
            method: SylvesterMethod::Spectral,
            sylvester_tol: 1e-12,
        }
    }
}

/// One outer iteration of a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub iteration: usize,
    /// Data term: `½‖ℛ(FG − I)‖²` or `½‖D − GAH‖²`.
    pub objective: f64,
    pub lagrangian: f64,
    /// `‖X̃X − I‖_F + ‖XX̃ − I‖_F` for the fitted block `X`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct GFit {
    pub state: GState,
    pub trace: Vec<OuterRecord>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct HFit {
    pub state: HState,
    pub trace: Vec<OuterRecord>,
    pub converged: bool,
}

fn solve(sys: Stationarity, cfg: &AlmConfig, stage: &'static str) -> Result<Mat> {
    // Products such as GᵀG are symmetric only up to rounding.
    let (p, q) = (sys.p.symmetrize(), sys.q.symmetrize());
    let x = solve_sylvester(&p, &q, &sys.c, cfg.method, cfg.sylvester_tol).map_err(|e| e.at_stage(stage))?;
    if !x.is_finite() {
        return Err(Error::NonFinite("Sylvester solution".into()).at_stage(stage));
    }
    Ok(x)
}

fn check_square(name: &str, m: &Mat, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::dim(format!("{name} is {:?}, expected {n}×{n}", m.shape())));
    }
    Ok(())
}

/// Fits an invertible `G` with `ℛ·F·G ≈ ℛ` by alternating exact block
/// minimizations of `L₁` in `G` and `G̃`, followed by dual ascent
/// `λ₁ += ρ(G̃G − I)`, `λ₂ += ρ(GG̃ − I)`. Multipliers start at zero.
pub fn optimize_g(f_part: &Mat, mask: &AccelMask, rho: f64, init: (Mat, Mat), cfg: &AlmConfig) -> Result<GFit> {
    let n = f_part.rows();
    check_square("F part", f_part, n)?;
    check_square("initial G", &init.0, n)?;
    check_square("initial G̃", &init.1, n)?;
    if mask.selected.len() != n {
        return Err(Error::dim(format!("mask has {} rows, F has {n}", mask.selected.len())));
    }
    if !(rho > 0.0) {
        return Err(Error::Config(format!("ρ must be positive, got {rho}")));
    }
    let rows = mask.weights();
    let data = L1Data { f_part, rows: &rows, rho };
    let mut st = GState {
        g: init.0,
        g_tilde: init.1,
        lambda1: Mat::zeros(n, n),
        lambda2: Mat::zeros(n, n),
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while !converged && it < cfg.max_outer {
        it += 1;
        st.g = solve(data.g_system(&st), cfg, "G update")?;
        st.g_tilde = solve(data.g_tilde_system(&st), cfg, "G̃ update")?;
        let e1 = st.g_tilde.matmul(&st.g).add_identity(-1.0);
        let e2 = st.g.matmul(&st.g_tilde).add_identity(-1.0);
        st.lambda1.axpy(rho, &e1);
        st.lambda2.axpy(rho, &e2);
        let residual = e1.frobenius() + e2.frobenius();
        trace.push(OuterRecord {
            iteration: it,
            objective: data.fidelity(&st.g),
            lagrangian: data.value(&st),
            residual,
        });
        converged = residual <= cfg.tol;
    }
    Ok(GFit { state: st, trace, converged })
}

/// Fits a (softly) orthonormal `H` with `G·A·H ≈ D` by alternating exact
/// block minimizations of `L₂` in `H` and `H̃`, followed by dual ascent
/// `λ₃ += μ(H̃H − I)`, `λ₄ += μ(HH̃ − I)`. Multipliers start at zero.
pub fn optimize_h(
    d: &Mat,
    g: &Mat,
    a: &Mat,
    nu: f64,
    mu: f64,
    init: (Mat, Mat),
    cfg: &AlmConfig,
) -> Result<HFit> {
    let n = a.cols();
    if d.rows() != g.rows() || g.cols() != a.rows() || d.cols() != n {
        return Err(Error::dim(format!(
            "D {:?} ≠ G {:?} · A {:?} · H",
            d.shape(),
            g.shape(),
            a.shape()
        )));
    }
    check_square("initial H", &init.0, n)?;
    check_square("initial H̃", &init.1, n)?;
    if !(nu > 0.0 && mu > 0.0) {
        return Err(Error::Config(format!("ν and μ must be positive, got {nu} and {mu}")));
    }
    let data = L2Data { d, g, a, nu, mu };
    let mut st = HState {
        h: init.0,
        h_tilde: init.1,
        lambda3: Mat::zeros(n, n),
        lambda4: Mat::zeros(n, n),
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while !converged && it < cfg.max_outer {
        it += 1;
        st.h = solve(data.h_system(&st), cfg, "H update")?;
        st.h_tilde = solve(data.h_tilde_system(&st), cfg, "H̃ update")?;
        let e3 = st.h_tilde.matmul(&st.h).add_identity(-1.0);
        let e4 = st.h.matmul(&st.h_tilde).add_identity(-1.0);
        st.lambda3.axpy(mu, &e3);
        st.lambda4.axpy(mu, &e4);
        let residual = e3.frobenius() + e4.frobenius();
        trace.push(OuterRecord {
            iteration: it,
            objective: data.fidelity(&st.h),
            lagrangian: data.value(&st),
            residual,
        });
        converged = residual <= cfg.tol;
    }
    Ok(HFit { state: st, trace, converged })
}

/// Nearest orthogonal matrix `U·Vᵀ` (polar factor).
pub fn polar_projection(h: &Mat) -> Mat {
    let s = svd(h);
    let k = h.rows().min(h.cols());
    s.u.col_range(0, k).matmul_t(&s.v.col_range(0, k))
}
