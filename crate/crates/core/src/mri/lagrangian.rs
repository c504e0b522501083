//! The two augmented Lagrangians used to fit the dimension-1 factors, with
//! gradients derived directly from the objectives.
//!
//! `L₁(G, G̃) = ½‖ℛ(F·G − I)‖² + ⟨λ₁, G̃G − I⟩ + ⟨λ₂, GG̃ − I⟩
//!            + ρ/2·(‖G̃G − I‖² + ‖GG̃ − I‖²)`
//!
//! `L₂(H, H̃) = ½‖D − G·A·H‖² + ν/2·‖H − H̃ᵀ‖² + ⟨λ₃, H̃H − I⟩ + ⟨λ₄, HH̃ − I⟩
//!            + μ/2·(‖H̃H − I‖² + ‖HH̃ − I‖²)`
//!
//! Each gradient is affine in its block variable and splits as
//! `P·X + X·Q + C` with symmetric `P`, `Q`; the solvers set it to zero.

use crate::linalg::Mat;

/// Block variables and multipliers of `L₁`.
#[derive(Clone, Debug)]
pub struct GState {
    pub g: Mat,
    pub g_tilde: Mat,
    pub lambda1: Mat,
    pub lambda2: Mat,
}

/// Block variables and multipliers of `L₂`.
#[derive(Clone, Debug)]
pub struct HState {
    pub h: Mat,
    pub h_tilde: Mat,
    pub lambda3: Mat,
    pub lambda4: Mat,
}

/// Data of `L₁`: the real or imaginary DFT part and the row mask weights.
#[derive(Clone, Copy, Debug)]
pub struct L1Data<'a> {
    pub f_part: &'a Mat,
    pub rows: &'a [f64],
    pub rho: f64,
}

/// Data of `L₂`.
#[derive(Clone, Copy, Debug)]
pub struct L2Data<'a> {
    pub d: &'a Mat,
    pub g: &'a Mat,
    pub a: &'a Mat,
    pub nu: f64,
    pub mu: f64,
}

/// A Sylvester system `P·X + X·Q + C = 0`.
pub struct Stationarity {
    pub p: Mat,
    pub q: Mat,
    pub c: Mat,
}

impl Stationarity {
    pub fn gradient_at(&self, x: &Mat) -> Mat {
        self.p.matmul(x).add(&x.matmul(&self.q)).add(&self.c)
    }
}

fn defect(m: &Mat) -> Mat {
    m.add_identity(-1.0)
}

impl L1Data<'_> {
    /// `½‖ℛ(F·G − I)‖²`.
    pub fn fidelity(&self, g: &Mat) -> f64 {
        0.5 * defect(&self.f_part.matmul(g)).scale_rows(self.rows).frobenius().powi(2)
    }

    pub fn value(&self, s: &GState) -> f64 {
        let e1 = defect(&s.g_tilde.matmul(&s.g));
        let e2 = defect(&s.g.matmul(&s.g_tilde));
        self.fidelity(&s.g)
            + s.lambda1.inner(&e1)
            + s.lambda2.inner(&e2)
            + 0.5 * self.rho * (e1.frobenius().powi(2) + e2.frobenius().powi(2))
    }

    /// `∇_G L₁ = (FᵀℛF + ρG̃ᵀG̃)·G + G·(ρG̃G̃ᵀ) + G̃ᵀλ₁ + λ₂G̃ᵀ − Fᵀℛ − 2ρG̃ᵀ`.
    pub fn g_system(&self, s: &GState) -> Stationarity {
        let rf = self.f_part.scale_rows(self.rows);
        let gt = &s.g_tilde;
        let p = self.f_part.t_matmul(&rf).add(&gt.t_matmul(gt).scale(self.rho));
        let q = gt.matmul_t(gt).scale(self.rho);
        let gtt = gt.transpose();
        let c = gt
            .t_matmul(&s.lambda1)
            .add(&s.lambda2.matmul(&gtt))
            .sub(&rf.transpose())
            .sub(&gtt.scale(2.0 * self.rho));
        Stationarity { p, q, c }
    }

    /// `∇_G̃ L₁ = (ρGᵀG)·G̃ + G̃·(ρGGᵀ) + Gᵀλ₂ + λ₁Gᵀ − 2ρGᵀ`.
    pub fn g_tilde_system(&self, s: &GState) -> Stationarity {
        let g = &s.g;
        let gt = g.transpose();
        let p = g.t_matmul(g).scale(self.rho);
        let q = g.matmul_t(g).scale(self.rho);
        let c = g
            .t_matmul(&s.lambda2)
            .add(&s.lambda1.matmul(&gt))
            .sub(&gt.scale(2.0 * self.rho));
        Stationarity { p, q, c }
    }
}

impl L2Data<'_> {
    /// `½‖D − G·A·H‖²`.
    pub fn fidelity(&self, h: &Mat) -> f64 {
        0.5 * self.d.sub(&self.g.matmul(self.a).matmul(h)).frobenius().powi(2)
    }

    pub fn value(&self, s: &HState) -> f64 {
        let e3 = defect(&s.h_tilde.matmul(&s.h));
        let e4 = defect(&s.h.matmul(&s.h_tilde));
        self.fidelity(&s.h)
            + 0.5 * self.nu * s.h.sub(&s.h_tilde.transpose()).frobenius().powi(2)
            + s.lambda3.inner(&e3)
            + s.lambda4.inner(&e4)
            + 0.5 * self.mu * (e3.frobenius().powi(2) + e4.frobenius().powi(2))
    }

    /// `∇_H L₂ = (AᵀGᵀGA + νI + μH̃ᵀH̃)·H + H·(μH̃H̃ᵀ)
    ///           − AᵀGᵀD − νH̃ᵀ + H̃ᵀλ₃ + λ₄H̃ᵀ − 2μH̃ᵀ`.
    pub fn h_system(&self, s: &HState) -> Stationarity {
        let ga = self.g.matmul(self.a);
        let ht = &s.h_tilde;
        let htt = ht.transpose();
        let p = ga
            .t_matmul(&ga)
            .add_identity(self.nu)
            .add(&ht.t_matmul(ht).scale(self.mu));
        let q = ht.matmul_t(ht).scale(self.mu);
        let c = ht
            .t_matmul(&s.lambda3)
            .add(&s.lambda4.matmul(&htt))
            .sub(&ga.t_matmul(self.d))
            .sub(&htt.scale(self.nu + 2.0 * self.mu));
        Stationarity { p, q, c }
    }

    /// `∇_H̃ L₂ = (νI + μHᵀH)·H̃ + H̃·(μHHᵀ) + λ₃Hᵀ + Hᵀλ₄ − (ν + 2μ)Hᵀ`.
    pub fn h_tilde_system(&self, s: &HState) -> Stationarity {
        let h = &s.h;
        let h_t = h.transpose();
        let p = h.t_matmul(h).scale(self.mu).add_identity(self.nu);
        let q = h.matmul_t(h).scale(self.mu);
        let c = s
            .lambda3
            .matmul(&h_t)
            .add(&h.t_matmul(&s.lambda4))
            .sub(&h_t.scale(self.nu + 2.0 * self.mu));
        Stationarity { p, q, c }
    }
}
