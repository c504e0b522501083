//! Dense linear algebra: real and complex matrices, spectral and singular
//! value decompositions, pseudo-inverses, Sylvester solvers and DFT matrices.

mod cmat;
mod decomp;
mod dft;
mod eigen;
pub mod matfile;
mod mat;
mod svd;
mod sylvester;

pub use cmat::CMat;
pub use decomp::{
    complete_to_invertible, cond, default_rank_tol, householder_qr, inverse, nullspace_basis,
    kernel_from_svd, orthonormal_completion, pinv, pinv_from_svd, rank, sym_inv_sqrt,
};
pub use dft::dft_matrix;
pub use eigen::{sym_eig, sym_eig_with, EigenMethod, SpectralDecomp};
pub use mat::{dot, norm2, Mat};
pub use svd::{svd, Svd};
pub use sylvester::{solve_sylvester, sylvester_residual, SylvesterMethod};
