//! Factorizations `D = G·A·H` of a dictionary against a random matrix of
//! equal rank, and the sensing matrices `S = ℰ·G⁻¹` they induce.
//!
//! Three constructions are provided:
//!
//! * [`factor_spectral`] pairs the eigenvalues of `DDᵀ` and `AAᵀ`;
//! * [`factor_range`] maps bases of the row spaces onto each other;
//! * [`factor_tight_frame`] handles `DDᵀ = I` with a whitening of `A`.

use serde::{Deserialize, Serialize};

use crate::ensembles::RowSelector;
use crate::error::{Error, Result};
use crate::linalg::{
    complete_to_invertible, inverse, kernel_from_svd, pinv_from_svd, svd, sym_eig, sym_inv_sqrt, Mat, Svd,
};

/// Which construction produced a factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Spectral,
    Range,
    TightFrame,
}

impl std::str::FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "range" => Ok(Self::Range),
            "tight-frame" | "tight_frame" => Ok(Self::TightFrame),
            other => Err(Error::Config(format!("unknown construction '{other}'"))),
        }
    }
}

/// `D = G·A·H` with diagnostics.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub g: Mat,
    /// `G⁻¹`, computed in closed form where the construction allows.
    pub g_inv: Mat,
    pub a: Mat,
    pub h: Mat,
    /// `‖GAH − D‖_F / ‖D‖_F`.
    pub residual: f64,
    /// `‖HHᵀ − I‖_F`.
    pub orth_defect: f64,
    pub cond_g: f64,
    pub construction: Construction,
}

impl Factorization {
    fn finish(d: &Mat, a: &Mat, g: Mat, g_inv: Mat, h: Mat, construction: Construction) -> Self {
        let gah = g.matmul(a).matmul(&h);
        let residual = gah.sub(d).frobenius() / d.frobenius().max(f64::MIN_POSITIVE);
        let orth_defect = h.orthonormal_rows_defect();
        let s = svd(&g);
        let cond_g = if s.sigma_min() > 0.0 {
            s.sigma_max() / s.sigma_min()
        } else {
            f64::INFINITY
        };
        Self {
            g,
            g_inv,
            a: a.clone(),
            h,
            residual,
            orth_defect,
            cond_g,
            construction,
        }
    }
}

/// Rank and row-space data shared by the constructions.
struct RowSpace {
    rank: usize,
    /// Orthonormal basis of the row space (`n×r`).
    basis: Mat,
    /// Orthonormal basis of the kernel (`n×(n−r)`).
    kernel: Mat,
    svd: Svd,
}

fn row_space(m: &Mat) -> RowSpace {
    let d = svd(m);
    let tol = (m.rows().max(m.cols()) as f64) * f64::EPSILON * d.sigma_max();
    let rank = d.rank(tol);
    RowSpace {
        rank,
        basis: d.v.col_range(0, rank),
        kernel: kernel_from_svd(&d, rank),
        svd: d,
    }
}

fn check_pair(d: &Mat, a: &Mat) -> Result<(RowSpace, RowSpace)> {
    if d.shape() != a.shape() {
        return Err(Error::dim(format!(
            "D is {:?} but A is {:?}",
            d.shape(),
            a.shape()
        )));
    }
    if d.rows() > d.cols() {
        return Err(Error::dim(format!(
            "expected l ≤ n, got {}×{}",
            d.rows(),
            d.cols()
        )));
    }
    let rd = row_space(d);
    let ra = row_space(a);
    if rd.rank != ra.rank {
        return Err(Error::RankMismatch {
            dict_rank: rd.rank,
            ensemble_rank: ra.rank,
        });
    }
    Ok((rd, ra))
}

/// Eigenvalue-pairing construction.
///
/// With `DDᵀ = Q_D Σ_D Q_Dᵀ`, `AAᵀ = Q_A Σ_A Q_Aᵀ` (descending) and zero
/// eigenvalues replaced by one, `T = Q_A (Σ'_A Σ'_D⁻¹)^{1/2} Q_Dᵀ` satisfies
/// `T·D·Dᵀ·Tᵀ = A·Aᵀ`. Then `G = T⁻¹ = Q_D (Σ'_D Σ'_A⁻¹)^{1/2} Q_Aᵀ` and
/// `H = A⁺·T·D + N_A·N_Dᵀ`.
pub fn factor_spectral(d: &Mat, a: &Mat) -> Result<Factorization> {
    let (rd, ra) = check_pair(d, a)?;
    let r = rd.rank;
    let ed = sym_eig(&d.matmul_t(d))?;
    let ea = sym_eig(&a.matmul_t(a))?;
    let l = d.rows();
    let lifted = |v: &[f64], i: usize| if i < r { v[i] } else { 1.0 };
    let ratio: Vec<f64> = (0..l)
        .map(|i| (lifted(&ea.eigenvalues, i) / lifted(&ed.eigenvalues, i)).sqrt())
        .collect();
    let inv_ratio: Vec<f64> = ratio.iter().map(|x| 1.0 / x).collect();
    let t = ea.q.scale_columns(&ratio).matmul_t(&ed.q);
    let g = ed.q.scale_columns(&inv_ratio).matmul_t(&ea.q);
    let mut h = pinv_from_svd(&ra.svd, r).matmul(&t).matmul(d);
    h.axpy(1.0, &ra.kernel.matmul_t(&rd.kernel));
    Ok(Factorization::finish(d, a, g, t, h, Construction::Spectral))
}

/// Row-space basis construction: `G = ext(D·U_D)·ext(A·U_A)⁻¹` and
/// `H = U_A·U_Dᵀ + N_A·N_Dᵀ`, where `ext` appends an orthonormal basis of
/// the complement of the column space.
pub fn factor_range(d: &Mat, a: &Mat) -> Result<Factorization> {
    let (rd, ra) = check_pair(d, a)?;
    let ext_d = complete_to_invertible(&d.matmul(&rd.basis))?;
    let ext_a = complete_to_invertible(&a.matmul(&ra.basis))?;
    let g = ext_d.matmul(&inverse(&ext_a)?);
    let g_inv = ext_a.matmul(&inverse(&ext_d)?);
    let mut h = ra.basis.matmul_t(&rd.basis);
    h.axpy(1.0, &ra.kernel.matmul_t(&rd.kernel));
    Ok(Factorization::finish(d, a, g, g_inv, h, Construction::Range))
}

/// Tight-frame construction for `DDᵀ = I`: `G = O·(AAᵀ)^{-1/2}` and
/// `H = Aᵀ·Gᵀ·D + N_A·N_Dᵀ`. `G` is orthonormal whenever `A` is also a
/// tight frame. `o = None` uses the identity.
pub fn factor_tight_frame(d: &Mat, a: &Mat, o: Option<&Mat>) -> Result<Factorization> {
    let l = d.rows();
    let frame_defect = d.matmul_t(d).sub(&Mat::identity(l)).frobenius();
    if frame_defect > 1e-6 * l as f64 {
        return Err(Error::Precondition(format!(
            "D is not a tight frame: ‖DDᵀ − I‖_F = {frame_defect:.3e}"
        )));
    }
    let (rd, ra) = check_pair(d, a)?;
    if ra.rank != l {
        return Err(Error::RankMismatch {
            dict_rank: rd.rank,
            ensemble_rank: ra.rank,
        });
    }
    let identity = Mat::identity(l);
    let o = o.unwrap_or(&identity);
    if o.shape() != (l, l) || o.orthonormal_columns_defect() > 1e-8 * l as f64 {
        return Err(Error::Precondition("O must be an orthonormal l×l matrix".into()));
    }
    let w = sym_inv_sqrt(&a.matmul_t(a))?;
    let g = o.matmul(&w);
    // G⁻¹ = (AAᵀ)^{1/2}·Oᵀ = (AAᵀ)·(AAᵀ)^{-1/2}·Oᵀ.
    let g_inv = a.matmul_t(a).matmul(&w).matmul_t(o);
    let mut h = a.t_matmul(&g.transpose()).matmul(d);
    h.axpy(1.0, &ra.kernel.matmul_t(&rd.kernel));
    Ok(Factorization::finish(d, a, g, g_inv, h, Construction::TightFrame))
}

/// Dispatches to one of the constructions.
pub fn factorize(construction: Construction, d: &Mat, a: &Mat) -> Result<Factorization> {
    match construction {
        Construction::Spectral => factor_spectral(d, a),
        Construction::Range => factor_range(d, a),
        Construction::TightFrame => factor_tight_frame(d, a, None),
    }
}

/// Condition number above which a sensing system carries a warning.
pub const COND_WARNING: f64 = 1e12;

/// A sensing matrix `S = ℰ·G⁻¹` together with the composed operator `S·D`.
#[derive(Clone, Debug)]
pub struct SensingSystem {
    pub s: Mat,
    pub d: Mat,
    /// `S·D`, which equals `ℰ·A·H`.
    pub composed: Mat,
    pub selector: RowSelector,
    pub a: Mat,
    pub h: Mat,
    pub cond_g: f64,
    pub warning: Option<String>,
}

impl SensingSystem {
    /// `ℰ·A·H`, the operator the composed matrix should reproduce.
    pub fn ensemble_side(&self) -> Mat {
        self.selector.apply(&self.a).matmul(&self.h)
    }

    /// The benchmark operator `ℰ·A`.
    pub fn benchmark(&self) -> Mat {
        self.selector.apply(&self.a)
    }
}

pub fn build_sensing(fact: &Factorization, d: &Mat, selector: &RowSelector) -> Result<SensingSystem> {
    if fact.residual > 1e-6 {
        return Err(Error::Precondition(format!(
            "factorization residual {:.3e} exceeds 1e-6",
            fact.residual
        )));
    }
    if selector.l() != d.rows() || fact.g_inv.rows() != d.rows() {
        return Err(Error::dim(format!(
            "selector over {} rows, dictionary has {}",
            selector.l(),
            d.rows()
        )));
    }
    let s = selector.apply(&fact.g_inv);
    let composed = s.matmul(d);
    let warning = (fact.cond_g > COND_WARNING).then(|| {
        format!(
            "G is ill-conditioned (cond {:.3e}); S = ℰG⁻¹ may amplify noise",
            fact.cond_g
        )
    });
    Ok(SensingSystem {
        s,
        d: d.clone(),
        composed,
        selector: selector.clone(),
        a: fact.a.clone(),
        h: fact.h.clone(),
        cond_g: fact.cond_g,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{draw_ensemble, draw_row_selector, EnsembleKind};
    use crate::linalg::householder_qr;
    use crate::rng::Seed;
    use proptest::prelude::*;

    fn gaussian(l: usize, n: usize, seed: u64) -> Mat {
        draw_ensemble(EnsembleKind::Gaussian, l, n, Seed(seed))
    }

    /// Random matrix with orthonormal rows.
    fn tight(l: usize, n: usize, seed: u64) -> Mat {
        let (q, _) = householder_qr(&gaussian(n, n, seed));
        q.col_range(0, l).transpose()
    }

    fn assert_exact(f: &Factorization, n: usize) {
        assert!(f.residual <= 1e-8, "residual {}", f.residual);
        assert!(f.orth_defect <= 1e-8 * n as f64, "orth {}", f.orth_defect);
        assert!(f.cond_g.is_finite());
        let gi = f.g.matmul(&f.g_inv).sub(&Mat::identity(f.g.rows())).frobenius();
        assert!(gi < 1e-8 * f.cond_g.max(1.0));
    }

    #[test]
    fn spectral_identity_case() {
        let d = gaussian(8, 16, 1);
        let f = factor_spectral(&d, &d).unwrap();
        assert!(f.g.sub(&Mat::identity(8)).frobenius() < 1e-8);
        assert!(f.h.sub(&Mat::identity(16)).frobenius() < 1e-8);
    }

    #[test]
    fn spectral_random_pair() {
        let (d, a) = (gaussian(8, 16, 2), gaussian(8, 16, 3));
        let f = factor_spectral(&d, &a).unwrap();
        assert_exact(&f, 16);
        let lhs = f.g_inv.matmul(&d).matmul_t(&d).matmul_t(&f.g_inv);
        let aat = a.matmul_t(&a);
        assert!(lhs.sub(&aat).frobenius() <= 1e-8 * aat.frobenius());
    }

    #[test]
    fn rank_mismatch_is_rejected() {
        let d = gaussian(4, 3, 4).matmul(&gaussian(3, 8, 5));
        let a = gaussian(4, 8, 6);
        for c in [Construction::Spectral, Construction::Range] {
            match factorize(c, &d, &a) {
                Err(Error::RankMismatch {
                    dict_rank,
                    ensemble_rank,
                }) => assert_eq!((dict_rank, ensemble_rank), (3, 4)),
                other => panic!("expected rank mismatch, got {other:?}"),
            }
        }
    }

    #[test]
    fn rank_deficient_pairs_factor() {
        let d = gaussian(5, 3, 7).matmul(&gaussian(3, 9, 8));
        let a = gaussian(5, 3, 9).matmul(&gaussian(3, 9, 10));
        for c in [Construction::Spectral, Construction::Range] {
            assert_exact(&factorize(c, &d, &a).unwrap(), 9);
        }
    }

    #[test]
    fn range_cases() {
        let d = gaussian(8, 16, 11);
        let f = factor_range(&d, &d).unwrap();
        assert_exact(&f, 16);
        let a = gaussian(8, 16, 12);
        let f = factor_range(&d, &a).unwrap();
        assert_exact(&f, 16);
        // GAU_A = DU_D on the row-space basis.
        let rd = row_space(&d);
        let ra = row_space(&a);
        let lhs = f.g.matmul(&a).matmul(&ra.basis);
        assert!(lhs.sub(&d.matmul(&rd.basis)).frobenius() < 1e-8 * d.frobenius());

        let (ds, as_) = (gaussian(6, 6, 13), gaussian(6, 6, 14));
        let f = factor_range(&ds, &as_).unwrap();
        assert_exact(&f, 6);
    }

    #[test]
    fn tight_frame_cases() {
        let d = tight(8, 16, 15);
        let a = tight(8, 16, 16);
        let f = factor_tight_frame(&d, &a, None).unwrap();
        assert_exact(&f, 16);
        assert!(f.g.matmul_t(&f.g).sub(&Mat::identity(8)).frobenius() < 1e-8);

        let f = factor_tight_frame(&d, &d, None).unwrap();
        assert!(f.g.sub(&Mat::identity(8)).frobenius() < 1e-8);

        let f = factor_tight_frame(&d, &gaussian(8, 16, 17), None).unwrap();
        assert_exact(&f, 16);

        let o = householder_qr(&gaussian(8, 8, 18)).0;
        assert_exact(&factor_tight_frame(&d, &a, Some(&o)).unwrap(), 16);

        assert!(matches!(
            factor_tight_frame(&gaussian(8, 16, 19), &a, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sensing_identity_cases() {
        let d = gaussian(8, 16, 20);
        let f = factor_spectral(&d, &d).unwrap();
        let sys = build_sensing(&f, &d, &RowSelector::identity(8)).unwrap();
        assert!(sys.s.sub(&Mat::identity(8)).frobenius() < 1e-8);
        assert!(sys.composed.sub(&d).frobenius() < 1e-8 * d.frobenius());

        let a = gaussian(8, 16, 21);
        let f = factor_spectral(&d, &a).unwrap();
        let sel = draw_row_selector(4, 8, Seed(22)).unwrap();
        let sys = build_sensing(&f, &d, &sel).unwrap();
        assert!(sys.composed.sub(&sys.ensemble_side()).frobenius() <= 1e-8 * d.frobenius());
        assert!(sys.warning.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn every_construction_is_exact(l in 2usize..10, extra in 0usize..10, seed in any::<u64>()) {
            let n = l + extra;
            let d = gaussian(l, n, seed);
            let a = gaussian(l, n, seed ^ 5);
            for c in [Construction::Spectral, Construction::Range] {
                let f = factorize(c, &d, &a).unwrap();
                prop_assert!(f.residual <= 1e-8);
                prop_assert!(f.orth_defect <= 1e-8 * n as f64);
            }
            let f = factor_tight_frame(&tight(l, n, seed ^ 9), &a, None).unwrap();
            prop_assert!(f.residual <= 1e-8);
            prop_assert!(f.orth_defect <= 1e-8 * n as f64);
        }
    }
}
