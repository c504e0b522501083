//! Sensing-matrix construction for prescribed sparsifying dictionaries.
//!
//! Given a dictionary `D` and a random matrix `A` of equal rank, the
//! [`factorize`] module produces `D = G·A·H` with `G` invertible and `H`
//! orthonormal. Selecting rows of `G⁻¹` then yields a sensing matrix `S`
//! whose composition `S·D = ℰ·A·H` inherits the restricted isometry
//! behaviour of the random ensemble.
//!
//! The same factorization idea drives the accelerated-MRI pipeline in
//! [`mri`], where factors are fitted to the real and imaginary parts of a
//! DFT matrix restricted to the acquired k-space lines.

pub mod dictionaries;
pub mod ensembles;
pub mod error;
pub mod factorize;
pub mod harness;
pub mod linalg;
pub mod mri;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{CMat, Mat};
pub use rng::Seed;
