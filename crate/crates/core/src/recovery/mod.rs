//! Sparse and image recovery: CoSaMP for synthesis-sparse vectors, a
//! highpass-weighted ℓ₁ proximal gradient for wavelet coefficient grids, a
//! total-variation baseline, and image quality metrics.

mod cosamp;
mod fista;
mod metrics;
mod tv;

pub use cosamp::{cosamp, recover_benchmark, recover_synthesis, SparseRecoveryConfig};
pub use fista::{fista_weighted_l1, weighted_l1_objective, ComplexSplitOp, FistaConfig, LinOp2D};
pub use metrics::{psnr, ssim};
pub use tv::{total_variation, tv_objective, tv_reconstruct, TvConfig};

/// Output of an iterative solver.
#[derive(Clone, Debug)]
pub struct RecoveryResult<T> {
    pub estimate: T,
    /// Data-fidelity value after each iteration.
    pub residual_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}
