//! Quaternion matrices, the complex adjoint, QSVD, and singular value thresholding.

mod matrix;
mod qsvd;

pub use matrix::QuaternionMatrix;
pub use qsvd::{
    adjoint_singular_values, nuclear_norm, qsvd, qsvd_factors, rank, singular_values, svt,
    write_spectrum_csv, QsvdFactors, QsvdResult, RankTolerance,
};

#[cfg(test)]
pub(crate) mod testutil {
    pub use crate::synth::{random_qmatrix, rng, unitarity_residual};
}
