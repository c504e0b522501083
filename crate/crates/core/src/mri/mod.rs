//! Accelerated MRI: row-undersampling masks, k-space simulation, the
//! augmented-Lagrangian fits of the dimension-1 factors, and end-to-end
//! image recovery.

mod lagrangian;
mod mask;
mod pipeline;
mod solvers;

pub use lagrangian::{GState, HState, L1Data, L2Data, Stationarity};
pub use mask::{make_mask, make_mask_with, simulate_kspace, simulate_kspace_with, zero_fill, zero_fill_with, AccelMask};
pub use pipeline::{
    image_metrics, reconstruct, recover_image, transform_observation, FactorMode, ImageMetrics, Method, MriDicts,
    MriFactors, MriParams, MriRecovery, Reconstruction,
};
pub use solvers::{optimize_g, optimize_h, polar_projection, AlmConfig, GFit, HFit, OuterRecord};
