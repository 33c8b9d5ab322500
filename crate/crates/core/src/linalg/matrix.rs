use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Dense quaternion matrix stored as four real component planes
/// `Q = Q0 + Q1·i + Q2·j + Q3·k`, each column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionMatrix {
    planes: [DMatrix<f64>; 4],
}

impl QuaternionMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuaternionMatrix {
            planes: std::array::from_fn(|_| DMatrix::zeros(rows, cols)),
        }
    }

    /// Real identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.planes[0].fill_with_identity();
        m
    }

    pub fn from_planes(planes: [DMatrix<f64>; 4]) -> Result<Self> {
        let shape = planes[0].shape();
        if planes.iter().any(|p| p.shape() != shape) {
            return Err(Error::shape("component planes must share one shape"));
        }
        Ok(QuaternionMatrix { planes })
    }

    /// Builds a matrix from four column-major buffers of length `rows * cols`.
    pub fn from_column_major(rows: usize, cols: usize, data: [Vec<f64>; 4]) -> Result<Self> {
        if data.iter().any(|d| d.len() != rows * cols) {
            return Err(Error::shape(format!(
                "component buffer length does not match {rows}x{cols}"
            )));
        }
        let [a, b, c, d] = data;
        Ok(QuaternionMatrix {
            planes: [
                DMatrix::from_vec(rows, cols, a),
                DMatrix::from_vec(rows, cols, b),
                DMatrix::from_vec(rows, cols, c),
                DMatrix::from_vec(rows, cols, d),
            ],
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Quaternion,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Pure quaternion matrix `R·i + G·j + B·k` from three real planes.
    pub fn pure(x: DMatrix<f64>, y: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        let w = DMatrix::zeros(x.nrows(), x.ncols());
        Self::from_planes([w, x, y, z])
    }

    pub fn rows(&self) -> usize {
        self.planes[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.planes[0].ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.planes[0].shape()
    }

    pub fn plane(&self, c: usize) -> &DMatrix<f64> {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut DMatrix<f64> {
        &mut self.planes[c]
    }

    pub fn planes(&self) -> &[DMatrix<f64>; 4] {
        &self.planes
    }

    pub fn into_planes(self) -> [DMatrix<f64>; 4] {
        self.planes
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        Quaternion::from_components(std::array::from_fn(|c| self.planes[c][(i, j)]))
    }

    pub fn set(&mut self, i: usize, j: usize, q: Quaternion) {
        for (c, v) in q.components().into_iter().enumerate() {
            self.planes[c][(i, j)] = v;
        }
    }

    /// True when the real component plane is identically zero.
    pub fn is_pure(&self) -> bool {
        self.planes[0].iter().all(|&v| v == 0.0)
    }

    pub fn transpose(&self) -> Self {
        QuaternionMatrix {
            planes: std::array::from_fn(|c| self.planes[c].transpose()),
        }
    }

    /// Conjugate transpose `Qᴴ`.
    pub fn conj_transpose(&self) -> Self {
        QuaternionMatrix {
            planes: std::array::from_fn(|c| {
                let t = self.planes[c].transpose();
                if c == 0 {
                    t
                } else {
                    -t
                }
            }),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        QuaternionMatrix {
            planes: std::array::from_fn(|c| &self.planes[c] * s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(QuaternionMatrix {
            planes: std::array::from_fn(|c| &self.planes[c] + &other.planes[c]),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(QuaternionMatrix {
            planes: std::array::from_fn(|c| &self.planes[c] - &other.planes[c]),
        })
    }

    /// `self + s * other`, componentwise.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(QuaternionMatrix {
            planes: std::array::from_fn(|c| &self.planes[c] + &other.planes[c] * s),
        })
    }

    /// Quaternion matrix product. Entry order is preserved: `(AB)[m,n] = Σ_p A[m,p]·B[p,n]`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        let [a0, a1, a2, a3] = &self.planes;
        let [b0, b1, b2, b3] = &other.planes;
        let w = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
        let x = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
        let y = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
        let z = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
        Ok(QuaternionMatrix {
            planes: [w, x, y, z],
        })
    }

    /// Frobenius norm, `sqrt(Σ |q_mn|²)`.
    pub fn frobenius(&self) -> f64 {
        self.planes
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `Re tr(Aᴴ B)`, the real inner product used by the augmented Lagrangian.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .planes
            .iter()
            .zip(&other.planes)
            .map(|(a, b)| a.dot(b))
            .sum())
    }

    /// The isomorphic complex representation
    /// `[[Z1, Z2], [-conj(Z2), conj(Z1)]]` with `Z1 = Q0 + Q1·i`, `Z2 = Q2 + Q3·i`.
    pub fn complex_adjoint(&self) -> DMatrix<Complex64> {
        let (m, n) = self.shape();
        let [q0, q1, q2, q3] = &self.planes;
        DMatrix::from_fn(2 * m, 2 * n, |r, c| {
            let (i, top) = if r < m { (r, true) } else { (r - m, false) };
            let (j, left) = if c < n { (c, true) } else { (c - n, false) };
            let z1 = Complex64::new(q0[(i, j)], q1[(i, j)]);
            let z2 = Complex64::new(q2[(i, j)], q3[(i, j)]);
            match (top, left) {
                (true, true) => z1,
                (true, false) => z2,
                (false, true) => -z2.conj(),
                (false, false) => z1.conj(),
            }
        })
    }

    /// Recovers a quaternion matrix from a `2m x 2n` complex matrix with the
    /// adjoint block structure. Both copies of each block are averaged, so a
    /// structured input round-trips exactly.
    pub fn from_complex_adjoint(c: &DMatrix<Complex64>) -> Result<Self> {
        let (r, k) = c.shape();
        if r % 2 != 0 || k % 2 != 0 {
            return Err(Error::shape(format!(
                "complex adjoint must have even dimensions, got {r}x{k}"
            )));
        }
        let (m, n) = (r / 2, k / 2);
        let mut out = Self::zeros(m, n);
        for j in 0..n {
            for i in 0..m {
                let z1 = (c[(i, j)] + c[(i + m, j + n)].conj()) * 0.5;
                let z2 = (c[(i, j + n)] - c[(i + m, j)].conj()) * 0.5;
                out.set(i, j, Quaternion::from_cd(z1, z2));
            }
        }
        Ok(out)
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "expected {:?}, got {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::{random_qmatrix, rng};

    /// Entry-by-entry product with scalar Hamilton multiplication.
    fn naive_matmul(a: &QuaternionMatrix, b: &QuaternionMatrix) -> QuaternionMatrix {
        QuaternionMatrix::from_fn(a.rows(), b.cols(), |m, n| {
            (0..a.cols()).fold(Quaternion::ZERO, |acc, p| acc + a.get(m, p) * b.get(p, n))
        })
    }

    fn max_abs_diff_c(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn adjoint_of_j() {
        let q = QuaternionMatrix::from_fn(1, 1, |_, _| Quaternion::J);
        let f = q.complex_adjoint();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(f[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(f[(0, 1)], one);
        assert_eq!(f[(1, 0)], -one);
        assert_eq!(f[(1, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let f = QuaternionMatrix::identity(3).complex_adjoint();
        assert_eq!(f, DMatrix::<Complex64>::identity(6, 6));
    }

    #[test]
    fn adjoint_is_multiplicative() {
        let mut r = rng(11);
        for _ in 0..10 {
            let a = random_qmatrix(&mut r, 3, 3);
            let b = random_qmatrix(&mut r, 3, 3);
            let lhs = naive_matmul(&a, &b).complex_adjoint();
            let rhs = a.complex_adjoint() * b.complex_adjoint();
            assert!(max_abs_diff_c(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn matmul_examples() {
        let mut r = rng(3);
        let a = random_qmatrix(&mut r, 4, 3);
        assert_eq!(a.matmul(&QuaternionMatrix::identity(3)).unwrap(), a);

        let i = QuaternionMatrix::from_fn(1, 1, |_, _| Quaternion::I);
        let j = QuaternionMatrix::from_fn(1, 1, |_, _| Quaternion::J);
        assert_eq!(i.matmul(&j).unwrap().get(0, 0), Quaternion::K);
        assert_eq!(j.matmul(&i).unwrap().get(0, 0), -Quaternion::K);

        let b = random_qmatrix(&mut r, 3, 5);
        let ab = a.matmul(&b).unwrap();
        let lhs = ab.complex_adjoint();
        let rhs = a.complex_adjoint() * b.complex_adjoint();
        assert!(max_abs_diff_c(&lhs, &rhs) < 1e-12);
        let naive = naive_matmul(&a, &b);
        assert!(ab.sub(&naive).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = QuaternionMatrix::zeros(2, 3);
        let b = QuaternionMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(QuaternionMatrix::zeros(3, 2).frobenius(), 0.0);
        let q = QuaternionMatrix::from_fn(1, 1, |_, _| Quaternion::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(q.frobenius(), 2.0);

        let mut r = rng(5);
        let q = random_qmatrix(&mut r, 4, 6);
        let fro_c = q
            .complex_adjoint()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((q.frobenius() - fro_c / 2f64.sqrt()).abs() < 1e-12 * fro_c);
    }

    #[test]
    fn inner_product_examples() {
        let mut r = rng(8);
        let a = random_qmatrix(&mut r, 3, 4);
        let b = random_qmatrix(&mut r, 3, 4);
        let fro = a.frobenius();
        assert!((a.inner(&a).unwrap() - fro * fro).abs() < 1e-12 * fro * fro);
        assert_eq!(a.inner(&b).unwrap(), b.inner(&a).unwrap());
        let id = QuaternionMatrix::identity(5);
        assert_eq!(id.inner(&id).unwrap(), 5.0);

        let i = QuaternionMatrix::from_fn(1, 1, |_, _| Quaternion::I);
        let j = QuaternionMatrix::from_fn(1, 1, |_, _| Quaternion::J);
        // Re(conj(i) * j) from the scalar product
        assert_eq!((Quaternion::I.conj() * Quaternion::J).w, 0.0);
        assert_eq!(i.inner(&j).unwrap(), 0.0);

        // Re tr(Aᴴ B) computed through matrix products
        let tr: f64 = {
            let p = a.conj_transpose().matmul(&b).unwrap();
            (0..p.rows()).map(|k| p.get(k, k).w).sum()
        };
        assert!((tr - a.inner(&b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn inner_shape_mismatch() {
        let a = QuaternionMatrix::zeros(2, 3);
        let b = QuaternionMatrix::zeros(3, 2);
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn complex_adjoint_round_trip() {
        let mut r = rng(21);
        let q = random_qmatrix(&mut r, 5, 3);
        let back = QuaternionMatrix::from_complex_adjoint(&q.complex_adjoint()).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn conj_transpose_reverses_products() {
        let mut r = rng(4);
        let a = random_qmatrix(&mut r, 3, 4);
        let b = random_qmatrix(&mut r, 4, 2);
        let lhs = a.matmul(&b).unwrap().conj_transpose();
        let rhs = b.conj_transpose().matmul(&a.conj_transpose()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn planes_must_agree() {
        let planes = [
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 3),
            DMatrix::zeros(2, 2),
        ];
        assert!(QuaternionMatrix::from_planes(planes).is_err());
    }
}
