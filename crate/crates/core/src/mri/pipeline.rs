use serde::{Deserialize, Serialize};

use super::mask::{zero_fill_with, AccelMask};
use super::solvers::{optimize_g, optimize_h, polar_projection, AlmConfig, GFit, HFit};
use crate::dictionaries::{cdf97_basis, highpass_mask, CoeffGrid, WaveletDict};
use crate::ensembles::{draw_ensemble, EnsembleKind};
use crate::error::{Error, Result};
use crate::factorize::{factor_range, factor_spectral, Factorization, COND_WARNING};
use crate::linalg::{cond, dft_matrix, inverse, CMat, Mat, SylvesterMethod};
use crate::recovery::{fista_weighted_l1, psnr, ssim, tv_reconstruct, ComplexSplitOp, FistaConfig, LinOp2D, TvConfig};
use crate::rng::Seed;

/// How the dimension-1 operators of the coefficient problem are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorMode {
    /// Fit `G_R, G_I, H_R, H_I` by the augmented-Lagrangian solvers and use
    /// `ℛ·A·H_•` as the real/imaginary left operators.
    Fitted,
    /// Use the exact `ℛ·Re(F₁)·D₁` and `ℛ·Im(F₁)·D₁`, with `A₂ = D₂`.
    /// A lossless reference path for checking the rest of the pipeline.
    Oracle,
}

/// Reconstruction parameters. Every field has a default, so partial TOML
/// files are accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MriParams {
    pub rho: f64,
    pub nu: f64,
    pub mu: f64,
    /// Highpass ℓ₁ weight of the coefficient problem.
    pub gamma: f64,
    /// TV weight of the baseline.
    pub lambda_tv: f64,
    pub outer_iters: usize,
    /// Invertibility-residual tolerance of the factor fits.
    pub tol: f64,
    pub h_method: SylvesterMethod,
    pub fista_iters: usize,
    pub fista_tol: f64,
    pub tv_iters: usize,
    pub tv_tol: f64,
    pub tv_inner_iters: usize,
    /// Wavelet levels of the 2D transform.
    pub levels: usize,
    pub factor_mode: FactorMode,
    /// Reuse the dimension-1 random matrix `A` as `A₂` (square images only).
    pub tie_a: bool,
    /// Replace each fitted `H` by its polar factor.
    pub polar_projection: bool,
}

impl Default for MriParams {
    fn default() -> Self {
        Self {
            rho: 0.02,
            nu: 0.00016,
            mu: 0.00024,
            gamma: 0.0035,
            lambda_tv: 5e-5,
            outer_iters: 300,
            tol: 1e-6,
            h_method: SylvesterMethod::Spectral,
            fista_iters: 500,
            fista_tol: 1e-8,
            tv_iters: 300,
            tv_tol: 1e-6,
            tv_inner_iters: 20,
            levels: 3,
            factor_mode: FactorMode::Fitted,
            tie_a: false,
            polar_projection: false,
        }
    }
}

impl MriParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("rho", self.rho), ("nu", self.nu), ("mu", self.mu), ("tol", self.tol)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("gamma", self.gamma),
            ("lambda_tv", self.lambda_tv),
            ("fista_tol", self.fista_tol),
            ("tv_tol", self.tv_tol),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.outer_iters == 0 || self.fista_iters == 0 || self.tv_iters == 0 || self.levels == 0 {
            return Err(Error::Config("iteration counts and levels must be at least 1".into()));
        }
        Ok(())
    }

    fn g_config(&self) -> AlmConfig {
        AlmConfig {
            max_outer: self.outer_iters,
            tol: self.tol,
            ..AlmConfig::default()
        }
    }

    fn h_config(&self) -> AlmConfig {
        AlmConfig {
            method: self.h_method,
            ..self.g_config()
        }
    }

    pub fn tv_config(&self) -> TvConfig {
        TvConfig {
            max_iters: self.tv_iters,
            tol: self.tv_tol,
            inner_iters: self.tv_inner_iters,
        }
    }
}

/// Synthesis dictionaries for the two image dimensions. Lowpass columns
/// must come first in each.
#[derive(Clone, Debug)]
pub struct MriDicts {
    pub d1: WaveletDict,
    pub d2: WaveletDict,
}

impl MriDicts {
    /// Square CDF 9/7 bases for an `n1×n2` image.
    pub fn wavelet(n1: usize, n2: usize, levels: usize) -> Result<Self> {
        Ok(Self {
            d1: cdf97_basis(n1, levels)?,
            d2: cdf97_basis(n2, levels)?,
        })
    }

    fn lowpass_block(&self) -> Result<(usize, usize)> {
        let lead = |d: &WaveletDict| d.lowpass_cols.iter().enumerate().all(|(i, &c)| i == c);
        if !lead(&self.d1) || !lead(&self.d2) {
            return Err(Error::Input("lowpass columns must lead each dictionary".into()));
        }
        Ok((self.d1.lowpass_cols.len(), self.d2.lowpass_cols.len()))
    }
}

/// Fitted or exact operators of the coefficient problem.
#[derive(Clone, Debug)]
pub struct MriFactors {
    pub mode: FactorMode,
    /// Dimension-1 random matrix (fitted mode).
    pub a: Option<Mat>,
    pub g_real: Option<GFit>,
    pub g_imag: Option<GFit>,
    pub h_real: Option<HFit>,
    pub h_imag: Option<HFit>,
    /// `D₂ = G₂·A₂·H₂`.
    pub dim2: Factorization,
    pub op: ComplexSplitOp,
}

#[derive(Clone, Debug)]
pub struct MriRecovery {
    pub z: Mat,
    pub x: CoeffGrid,
    pub factors: MriFactors,
    pub y_tilde: CMat,
    /// Objective after each proximal-gradient iteration.
    pub fista_trace: Vec<f64>,
}

/// `Ỹ = Y·F₂ᴴ·(G₂ᵀ)⁻¹`.
pub fn transform_observation(y: &CMat, f2: &CMat, g2: &Mat) -> Result<CMat> {
    let n2 = y.cols();
    if f2.shape() != (n2, n2) || g2.shape() != (n2, n2) {
        return Err(Error::dim(format!(
            "Y has {n2} columns, F₂ is {:?}, G₂ is {:?}",
            f2.shape(),
            g2.shape()
        )));
    }
    let c = cond(g2);
    if !(c <= COND_WARNING) {
        return Err(Error::IllConditioned { cond: c, limit: COND_WARNING });
    }
    let g2_inv_t = inverse(&g2.transpose())?;
    Ok(y.matmul(&f2.adjoint()).matmul_real(&g2_inv_t))
}

fn fit_dimension_1(
    mask: &AccelMask,
    f1: &CMat,
    d1: &Mat,
    params: &MriParams,
    seed: Seed,
) -> Result<(Mat, GFit, GFit, HFit, HFit)> {
    let (n1, big_n1) = d1.shape();
    let a = draw_ensemble(EnsembleKind::Gaussian, n1, big_n1, seed);
    let init = factor_range(d1, &a).map_err(|e| e.at_stage("initial factorization"))?;
    let (re, im) = (f1.re(), f1.im());
    let fit_channel = |f_part: &Mat| -> Result<(GFit, HFit)> {
        let g = optimize_g(f_part, mask, params.rho, (init.g.clone(), init.g_inv.clone()), &params.g_config())
            .map_err(|e| e.at_stage("G fit"))?;
        let mut h = optimize_h(
            d1,
            &g.state.g,
            &a,
            params.nu,
            params.mu,
            (init.h.clone(), init.h.transpose()),
            &params.h_config(),
        )
        .map_err(|e| e.at_stage("H fit"))?;
        if params.polar_projection {
            h.state.h = polar_projection(&h.state.h);
        }
        Ok((g, h))
    };
    let (real, imag) = rayon::join(|| fit_channel(&re), || fit_channel(&im));
    let ((g_r, h_r), (g_i, h_i)) = (real?, imag?);
    Ok((a, g_r, g_i, h_r, h_i))
}

/// Recovers an image from row-undersampled k-space through the factored
/// coefficient model `Ỹ ≈ ℛ·A·H_•·X·(A₂H₂)ᵀ` and highpass-weighted ℓ₁.
///
/// Stages: dimension-2 spectral factorization; `G_R, G_I` fits against the
/// real and imaginary DFT parts; `H_R, H_I` fits; the observation
/// transform; the coefficient solve; synthesis `Z = D₁·X·D₂ᵀ`.
pub fn recover_image(y: &CMat, mask: &AccelMask, dicts: &MriDicts, params: &MriParams, seed: Seed) -> Result<MriRecovery> {
    params.validate()?;
    let (n1, n2) = y.shape();
    let (d1, d2) = (&dicts.d1.d, &dicts.d2.d);
    if mask.selected.len() != n1 || d1.rows() != n1 || d2.rows() != n2 {
        return Err(Error::dim(format!(
            "k-space {n1}×{n2}, mask {} rows, dictionaries with {} and {} rows",
            mask.selected.len(),
            d1.rows(),
            d2.rows()
        )));
    }
    let (low1, low2) = dicts.lowpass_block()?;
    let (f1, f2) = (dft_matrix(n1), dft_matrix(n2));
    let rows = mask.weights();

    let (a, fits, left_r, left_i, a2) = match params.factor_mode {
        FactorMode::Oracle => {
            let fd = f1.matmul_real(d1);
            (None, None, fd.re().scale_rows(&rows), fd.im().scale_rows(&rows), d2.clone())
        }
        FactorMode::Fitted => {
            let (a, g_r, g_i, h_r, h_i) = fit_dimension_1(mask, &f1, d1, params, seed.derive(1))?;
            let left_r = a.matmul(&h_r.state.h).scale_rows(&rows);
            let left_i = a.matmul(&h_i.state.h).scale_rows(&rows);
            let a2 = if params.tie_a {
                if a.shape() != d2.shape() {
                    return Err(Error::Config("tie_a needs dictionaries of equal shape".into()));
                }
                a.clone()
            } else {
                draw_ensemble(EnsembleKind::Gaussian, n2, d2.cols(), seed.derive(2))
            };
            (Some(a), Some((g_r, g_i, h_r, h_i)), left_r, left_i, a2)
        }
    };
    let dim2 = factor_spectral(d2, &a2).map_err(|e| e.at_stage("dimension-2 factorization"))?;
    let y_tilde = transform_observation(y, &f2, &dim2.g).map_err(|e| e.at_stage("observation transform"))?;
    let right = dim2.a.matmul(&dim2.h);
    let op = ComplexSplitOp {
        real_part: LinOp2D::new(left_r, right.clone()),
        imag_part: LinOp2D::new(left_i, right),
    };
    let mask_hp = highpass_mask(d1.cols(), d2.cols(), low1, low2);
    let cfg = FistaConfig {
        max_iters: params.fista_iters,
        tol: params.fista_tol,
    };
    let res = fista_weighted_l1(&op, &y_tilde, params.gamma, &mask_hp, &cfg).map_err(|e| e.at_stage("coefficient solve"))?;
    let z = d1.matmul(&res.estimate.x).matmul_t(d2);
    let (g_real, g_imag, h_real, h_imag) = match fits {
        Some((a, b, c, d)) => (Some(a), Some(b), Some(c), Some(d)),
        None => (None, None, None, None),
    };
    Ok(MriRecovery {
        z,
        x: res.estimate,
        factors: MriFactors {
            mode: params.factor_mode,
            a,
            g_real,
            g_imag,
            h_real,
            h_imag,
            dim2,
            op,
        },
        y_tilde,
        fista_trace: res.residual_trace,
    })
}

/// Reconstruction methods compared by the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Proposed,
    Tv,
    ZeroFill,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Tv => "tv",
            Method::ZeroFill => "zero-fill",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "tv" => Ok(Method::Tv),
            "zero-fill" | "zerofill" | "zero_fill" => Ok(Method::ZeroFill),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Output of [`reconstruct`].
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub method: Method,
    pub z: Mat,
    /// Coefficient grid (proposed method only).
    pub x: Option<CoeffGrid>,
    /// Named convergence traces, one value per iteration.
    pub traces: Vec<(String, Vec<f64>)>,
}

/// Runs one reconstruction method on masked k-space.
pub fn reconstruct(method: Method, y: &CMat, mask: &AccelMask, params: &MriParams, seed: Seed) -> Result<Reconstruction> {
    params.validate()?;
    let (n1, n2) = y.shape();
    if mask.selected.len() != n1 {
        return Err(Error::dim(format!("mask has {} rows, k-space {n1}", mask.selected.len())));
    }
    match method {
        Method::ZeroFill => Ok(Reconstruction {
            method,
            z: zero_fill_with(&y.scale_rows(&mask.weights()), &dft_matrix(n1), &dft_matrix(n2)),
            x: None,
            traces: Vec::new(),
        }),
        Method::Tv => {
            let res = tv_reconstruct(y, &mask.selected, &dft_matrix(n1), &dft_matrix(n2), params.lambda_tv, &params.tv_config())
                .map_err(|e| e.at_stage("TV reconstruction"))?;
            Ok(Reconstruction {
                method,
                z: res.estimate,
                x: None,
                traces: vec![("tv_objective".into(), res.residual_trace)],
            })
        }
        Method::Proposed => {
            let dicts = MriDicts::wavelet(n1, n2, params.levels)?;
            let y = y.scale_rows(&mask.weights());
            let rec = recover_image(&y, mask, &dicts, params, seed)?;
            let mut traces = vec![("fista_objective".to_string(), rec.fista_trace.clone())];
            let fits = [
                ("g_real", &rec.factors.g_real),
                ("g_imag", &rec.factors.g_imag),
            ];
            for (name, fit) in fits {
                if let Some(f) = fit {
                    traces.push((format!("{name}_objective"), f.trace.iter().map(|r| r.objective).collect()));
                    traces.push((format!("{name}_residual"), f.trace.iter().map(|r| r.residual).collect()));
                }
            }
            let fits = [
                ("h_real", &rec.factors.h_real),
                ("h_imag", &rec.factors.h_imag),
            ];
            for (name, fit) in fits {
                if let Some(f) = fit {
                    traces.push((format!("{name}_objective"), f.trace.iter().map(|r| r.objective).collect()));
                    traces.push((format!("{name}_residual"), f.trace.iter().map(|r| r.residual).collect()));
                }
            }
            Ok(Reconstruction {
                method,
                z: rec.z,
                x: Some(rec.x),
                traces,
            })
        }
    }
}

/// PSNR and SSIM of a reconstruction against a reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub psnr: f64,
    pub ssim: f64,
}

pub fn image_metrics(reference: &Mat, z: &Mat, peak: f64) -> Result<ImageMetrics> {
    Ok(ImageMetrics {
        psnr: psnr(reference, z, peak)?,
        ssim: ssim(reference, z, peak)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mri::mask::{make_mask, simulate_kspace};

    fn smooth_image(n1: usize, n2: usize) -> Mat {
        Mat::from_fn(n1, n2, |i, j| {
            let (x, y) = (i as f64 / n1 as f64 - 0.5, j as f64 / n2 as f64 - 0.5);
            let inside = x * x / 0.12 + y * y / 0.08 < 1.0;
            0.2 + 0.3 * x + if inside { 0.4 } else { 0.0 }
        })
    }

    #[test]
    fn identity_transform_is_noop() {
        let mut s = Seed(1).stream(0);
        let y = CMat::from_parts(&Mat::from_fn(4, 5, |_, _| s.normal()), &Mat::from_fn(4, 5, |_, _| s.normal()));
        let out = transform_observation(&y, &CMat::identity(5), &Mat::identity(5)).unwrap();
        assert!(out.sub(&y).frobenius() < 1e-15);
        let zero = transform_observation(&CMat::zeros(4, 5), &dft_matrix(5), &Mat::identity(5).scale(2.0)).unwrap();
        assert_eq!(zero.frobenius(), 0.0);
    }

    #[test]
    fn transform_rejects_ill_conditioned_g2() {
        let mut g = Mat::identity(4);
        g[(3, 3)] = 1e-14;
        let err = transform_observation(&CMat::zeros(2, 4), &dft_matrix(4), &g).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { .. }));
    }

    #[test]
    fn transformed_observation_identity() {
        let (n1, n2) = (16, 32);
        let dicts = MriDicts::wavelet(n1, n2, 2).unwrap();
        let mut s = Seed(2).stream(0);
        let x = Mat::from_fn(n1, n2, |_, _| if s.uniform(0.0, 1.0) < 0.1 { s.normal() } else { 0.0 });
        let mask = make_mask(n1, 4, Seed(3)).unwrap();
        let (f1, f2) = (dft_matrix(n1), dft_matrix(n2));
        // Y = ℛF₁D₁XD₂ᵀF₂ evaluated in two orders.
        let z = dicts.d1.d.matmul(&x).matmul_t(&dicts.d2.d);
        let y = simulate_kspace(&z, &mask).unwrap();
        let direct = f1.matmul_real(&dicts.d1.d.matmul(&x)).matmul(&CMat::real_matmul(&dicts.d2.d.transpose(), &f2)).scale_rows(&mask.weights());
        assert!(y.sub(&direct).frobenius() <= 1e-10 * y.frobenius());
        let a2 = draw_ensemble(EnsembleKind::Gaussian, n2, n2, Seed(4));
        let fac = factor_spectral(&dicts.d2.d, &a2).unwrap();
        let yt = transform_observation(&y, &f2, &fac.g).unwrap();
        let model = f1
            .matmul_real(&dicts.d1.d.matmul(&x).matmul_t(&fac.a.matmul(&fac.h)))
            .scale_rows(&mask.weights());
        assert!(yt.sub(&model).frobenius() <= 1e-8 * yt.frobenius());
    }

    #[test]
    fn oracle_path_is_lossless_with_full_mask() {
        let (n1, n2) = (32, 16);
        let z = smooth_image(n1, n2);
        let mask = AccelMask::full(n1);
        let y = simulate_kspace(&z, &mask).unwrap();
        let params = MriParams {
            gamma: 0.0,
            factor_mode: FactorMode::Oracle,
            levels: 2,
            fista_iters: 2000,
            fista_tol: 1e-15,
            ..Default::default()
        };
        let rec = recover_image(&y, &mask, &MriDicts::wavelet(n1, n2, 2).unwrap(), &params, Seed(5)).unwrap();
        let zf = zero_fill_with(&y, &dft_matrix(n1), &dft_matrix(n2));
        assert!(rec.z.sub(&zf).frobenius() <= 1e-4 * zf.frobenius());
    }

    #[test]
    fn fitted_path_runs_and_reports_traces() {
        let n = 16;
        let z = smooth_image(n, n);
        let mask = make_mask(n, 4, Seed(6)).unwrap();
        let y = simulate_kspace(&z, &mask).unwrap();
        let params = MriParams {
            outer_iters: 20,
            fista_iters: 50,
            levels: 1,
            ..Default::default()
        };
        let rec = reconstruct(Method::Proposed, &y, &mask, &params, Seed(7)).unwrap();
        assert!(rec.z.is_finite());
        assert!(rec.traces.iter().any(|(n, t)| n == "g_real_residual" && t.len() <= 20));
        let again = reconstruct(Method::Proposed, &y, &mask, &params, Seed(7)).unwrap();
        assert_eq!(rec.z, again.z);
    }

    #[test]
    fn params_validation() {
        assert!(MriParams::default().validate().is_ok());
        let bad = MriParams { rho: -1.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().is_config());
        let parsed: MriParams = toml::from_str("gamma = 0.01\nfactor_mode = \"oracle\"").unwrap();
        assert_eq!(parsed.gamma, 0.01);
        assert_eq!(parsed.rho, 0.02);
        assert!(toml::from_str::<MriParams>("gamm = 1.0").is_err());
    }
}
