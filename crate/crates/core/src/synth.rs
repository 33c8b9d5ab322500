//! Seeded generators for random and low-rank quaternion data.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{qsvd, QuaternionMatrix, RankTolerance};
use crate::tensor::QuaternionTensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard normal components.
pub fn random_qmatrix(rng: &mut impl Rng, rows: usize, cols: usize) -> QuaternionMatrix {
    let planes = std::array::from_fn(|_| gaussian(rng, rows, cols));
    QuaternionMatrix::from_planes(planes).expect("planes share a shape")
}

/// Tensor with i.i.d. standard normal components.
pub fn random_qtensor(rng: &mut impl Rng, shape: &[usize]) -> QuaternionTensor {
    let len: usize = shape.iter().product();
    let planes = std::array::from_fn(|_| (0..len).map(|_| rng.sample(StandardNormal)).collect());
    QuaternionTensor::from_planes(shape, planes).expect("valid shape")
}

/// Unitary quaternion matrix taken from the left factor of a random QSVD.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> QuaternionMatrix {
    qsvd(&random_qmatrix(rng, n, n), RankTolerance::Auto)
        .expect("finite random matrix")
        .u
}

/// `max(‖UUᴴ - I‖_F, ‖UᴴU - I‖_F)`.
pub fn unitarity_residual(u: &QuaternionMatrix) -> f64 {
    let left = u.matmul(&u.conj_transpose()).expect("square");
    let right = u.conj_transpose().matmul(u).expect("square");
    let il = QuaternionMatrix::identity(left.rows());
    let ir = QuaternionMatrix::identity(right.rows());
    left.sub(&il)
        .expect("same shape")
        .frobenius()
        .max(right.sub(&ir).expect("same shape").frobenius())
}

/// Pure quaternion matrix of rank at most `rank`: a pure `rows x rank`
/// factor times a real `rank x cols` factor, both standard normal.
pub fn pure_low_rank_matrix(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    rank: usize,
) -> Result<QuaternionMatrix> {
    if rank == 0 || rank > rows.min(cols) {
        return Err(Error::arg(format!(
            "rank {rank} must be between 1 and {} for a {rows}x{cols} matrix",
            rows.min(cols)
        )));
    }
    let mut left = random_qmatrix(rng, rows, rank);
    left.plane_mut(0).fill(0.0);
    let right = gaussian(rng, rank, cols);
    let planes = std::array::from_fn(|c| left.plane(c) * &right);
    QuaternionMatrix::from_planes(planes)
}

/// Pure quaternion tensor with Tucker rank at most `ranks`: a pure standard
/// normal core multiplied along every mode by a real standard normal factor.
pub fn pure_tucker_tensor(
    rng: &mut impl Rng,
    shape: &[usize],
    ranks: &[usize],
) -> Result<QuaternionTensor> {
    if ranks.len() != shape.len() {
        return Err(Error::arg(format!(
            "need one rank per mode: shape {shape:?}, ranks {ranks:?}"
        )));
    }
    if let Some(k) = (0..shape.len()).find(|&k| ranks[k] == 0 || ranks[k] > shape[k]) {
        return Err(Error::arg(format!(
            "rank {} for mode {k} must be between 1 and {}",
            ranks[k], shape[k]
        )));
    }
    let mut t = random_qtensor(rng, ranks);
    t.plane_mut(0).fill(0.0);
    for (k, &n) in shape.iter().enumerate() {
        let factor = gaussian(rng, n, ranks[k]);
        t = t.mode_product(&factor, k)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;

    #[test]
    fn low_rank_matrix_is_pure_with_requested_rank() {
        let mut r = rng(1);
        let m = pure_low_rank_matrix(&mut r, 12, 9, 3).unwrap();
        assert!(m.is_pure());
        assert_eq!(rank(&m, RankTolerance::Auto).unwrap(), 3);
        assert!(pure_low_rank_matrix(&mut r, 4, 4, 5).is_err());
    }

    #[test]
    fn tucker_tensor_has_requested_ranks() {
        let mut r = rng(2);
        let t = pure_tucker_tensor(&mut r, &[8, 7, 6], &[2, 3, 2]).unwrap();
        assert!(t.is_pure());
        assert_eq!(t.tucker_rank(RankTolerance::Auto).unwrap(), vec![2, 3, 2]);
        assert!(pure_tucker_tensor(&mut r, &[20, 20, 10], &[21, 2, 2]).is_err());
        assert!(pure_tucker_tensor(&mut r, &[20, 20], &[2, 2, 2]).is_err());
    }

    #[test]
    fn generators_are_seeded() {
        let a = random_qmatrix(&mut rng(7), 3, 3);
        let b = random_qmatrix(&mut rng(7), 3, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(&mut rng(3), 6);
        assert!(unitarity_residual(&u) < 1e-10);
    }
}
