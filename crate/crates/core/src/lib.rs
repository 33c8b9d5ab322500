//! Low-rank completion of color images and videos encoded as pure quaternion
//! matrices and tensors.
//!
//! Each RGB pixel becomes the pure quaternion `r·i + g·j + b·k`. Missing
//! pixels are recovered by minimizing a weighted sum of quaternion nuclear
//! norms of the mode unfoldings subject to agreement on the observed
//! entries, solved with ADMM ([`completion::lrc_qt`] for tensors,
//! [`completion::lrc_qm`] for matrices).

// `!(x > 0.0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod completion;
pub mod error;
pub mod linalg;
pub mod media;
pub mod metrics;
pub mod quaternion;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::QuaternionMatrix;
pub use quaternion::Quaternion;
pub use tensor::QuaternionTensor;
