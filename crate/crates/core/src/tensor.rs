//! N-th order quaternion tensors.
//!
//! Each of the four component arrays is one flat buffer with the first index
//! varying fastest. Mode indices are zero-based throughout the API.
//!
//! Mode-k unfolding places `n_k` on the rows; the column of entry
//! `(n_1, …, n_N)` is `Σ_{m≠k} n_m·J_m` with `J_m = Π_{m'<m, m'≠k} N_{m'}`.
//! Under this ordering the mode-0 unfolding is the flat buffer itself read as
//! a column-major matrix.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, QuaternionMatrix, RankTolerance};
use crate::quaternion::Quaternion;

pub const MAX_ORDER: usize = 8;
pub const QT1_MAGIC: &[u8; 5] = b"QTEN1";

#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionTensor {
    shape: Vec<usize>,
    planes: [Vec<f64>; 4],
}

pub(crate) fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.len() < 2 || shape.len() > MAX_ORDER {
        return Err(Error::arg(format!(
            "tensor order must be between 2 and {MAX_ORDER}, got {}",
            shape.len()
        )));
    }
    if shape.contains(&0) {
        return Err(Error::arg(format!(
            "tensor dimensions must be positive, got {shape:?}"
        )));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::arg(format!("tensor shape {shape:?} overflows")))
}

/// Flat offset of a multi-index, first index fastest.
pub(crate) fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter()
        .zip(shape)
        .rev()
        .fold(0, |acc, (&i, &n)| acc * n + i)
}

impl QuaternionTensor {
    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(QuaternionTensor {
            shape: shape.to_vec(),
            planes: std::array::from_fn(|_| vec![0.0; len]),
        })
    }

    pub fn from_planes(shape: &[usize], planes: [Vec<f64>; 4]) -> Result<Self> {
        let len = check_shape(shape)?;
        if planes.iter().any(|p| p.len() != len) {
            return Err(Error::shape(format!(
                "component buffers must hold {len} entries for shape {shape:?}"
            )));
        }
        Ok(QuaternionTensor {
            shape: shape.to_vec(),
            planes,
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> Quaternion) -> Result<Self> {
        let mut t = Self::zeros(shape)?;
        let mut idx = vec![0usize; shape.len()];
        for l in 0..t.len() {
            let q = f(&idx);
            t.set_flat(l, q);
            for (i, &n) in idx.iter_mut().zip(shape) {
                *i += 1;
                if *i < n {
                    break;
                }
                *i = 0;
            }
        }
        Ok(t)
    }

    /// Order-2 tensor with the same entries as `m`.
    pub fn from_matrix(m: &QuaternionMatrix) -> Self {
        let (r, c) = m.shape();
        QuaternionTensor {
            shape: vec![r, c],
            planes: std::array::from_fn(|k| m.plane(k).as_slice().to_vec()),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    /// Number of quaternion entries.
    pub fn len(&self) -> usize {
        self.planes[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.planes[c]
    }

    pub fn planes(&self) -> &[Vec<f64>; 4] {
        &self.planes
    }

    pub fn into_planes(self) -> [Vec<f64>; 4] {
        self.planes
    }

    pub fn get_flat(&self, l: usize) -> Quaternion {
        Quaternion::from_components(std::array::from_fn(|c| self.planes[c][l]))
    }

    pub fn set_flat(&mut self, l: usize, q: Quaternion) {
        for (c, v) in q.components().into_iter().enumerate() {
            self.planes[c][l] = v;
        }
    }

    pub fn get(&self, idx: &[usize]) -> Quaternion {
        self.get_flat(flat_index(&self.shape, idx))
    }

    pub fn set(&mut self, idx: &[usize], q: Quaternion) {
        let l = flat_index(&self.shape, idx);
        self.set_flat(l, q);
    }

    pub fn is_pure(&self) -> bool {
        self.planes[0].iter().all(|&v| v == 0.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.planes
            .iter()
            .flat_map(|p| p.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(QuaternionTensor {
            shape: self.shape.clone(),
            planes: std::array::from_fn(|c| {
                self.planes[c]
                    .iter()
                    .zip(&other.planes[c])
                    .map(|(a, b)| a - b)
                    .collect()
            }),
        })
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "expected tensor shape {:?}, got {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.order() {
            return Err(Error::InvalidMode {
                mode: k,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Mode-k unfolding, an `N_k x Π_{m≠k} N_m` quaternion matrix.
    pub fn unfold(&self, k: usize) -> Result<QuaternionMatrix> {
        self.check_mode(k)?;
        let layout = ModeLayout::new(&self.shape, k);
        let data = std::array::from_fn(|c| layout.gather(&self.planes[c]));
        QuaternionMatrix::from_column_major(layout.rows, layout.cols, data)
    }

    /// Inverse of [`QuaternionTensor::unfold`].
    pub fn fold(m: &QuaternionMatrix, k: usize, shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        if k >= shape.len() {
            return Err(Error::InvalidMode {
                mode: k,
                order: shape.len(),
            });
        }
        let layout = ModeLayout::new(shape, k);
        if m.shape() != (layout.rows, layout.cols) {
            return Err(Error::shape(format!(
                "mode-{k} unfolding of {shape:?} is {}x{}, got {}x{}",
                layout.rows,
                layout.cols,
                m.rows(),
                m.cols()
            )));
        }
        let planes = std::array::from_fn(|c| layout.scatter(m.plane(c).as_slice()));
        Ok(QuaternionTensor {
            shape: shape.to_vec(),
            planes,
        })
    }

    /// Per-mode ranks of the unfoldings.
    pub fn tucker_rank(&self, tol: RankTolerance) -> Result<Vec<usize>> {
        (0..self.order())
            .map(|k| linalg::rank(&self.unfold(k)?, tol))
            .collect()
    }

    /// Mode-k product with a real matrix `a` (`J x N_k`): every component
    /// plane of the mode-k unfolding is left-multiplied by `a`.
    pub fn mode_product(&self, a: &DMatrix<f64>, k: usize) -> Result<Self> {
        self.check_mode(k)?;
        if a.ncols() != self.shape[k] {
            return Err(Error::shape(format!(
                "mode-{k} product needs {} columns, got {}",
                self.shape[k],
                a.ncols()
            )));
        }
        let unfolded = self.unfold(k)?;
        let planes = std::array::from_fn(|c| a * unfolded.plane(c));
        let mut shape = self.shape.clone();
        shape[k] = a.nrows();
        QuaternionTensor::fold(&QuaternionMatrix::from_planes(planes)?, k, &shape)
    }

    /// Reorders modes so that mode `i` of the result is mode `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::arg(format!(
                "{perm:?} is not a permutation of {n} modes"
            )));
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut src_idx = vec![0usize; n];
        QuaternionTensor::from_fn(&new_shape, |idx| {
            for (i, &p) in perm.iter().enumerate() {
                src_idx[p] = idx[i];
            }
            self.get(&src_idx)
        })
    }

    /// Writes the `qt1` binary format: magic `QTEN1`, `u8` order, `u64` shape,
    /// then the four component arrays as little-endian `f64` in flat order.
    pub fn write_qt1<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(QT1_MAGIC)?;
        w.write_all(&[self.order() as u8])?;
        for &n in &self.shape {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.len() * 8);
        for p in &self.planes {
            buf.clear();
            for v in p {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_qt1<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)
            .map_err(|_| Error::malformed("truncated qt1 header"))?;
        if &magic != QT1_MAGIC {
            return Err(Error::malformed("missing QTEN1 magic"));
        }
        let shape = read_shape(&mut r)?;
        let len = check_shape(&shape)?;
        let planes = read_planes(&mut r, len)?;
        Ok(QuaternionTensor { shape, planes })
    }
}

pub(crate) fn read_shape<R: Read>(r: &mut R) -> Result<Vec<usize>> {
    let mut order = [0u8; 1];
    r.read_exact(&mut order)
        .map_err(|_| Error::malformed("truncated header"))?;
    let order = order[0] as usize;
    if order == 0 || order > MAX_ORDER {
        return Err(Error::malformed(format!("unsupported order {order}")));
    }
    (0..order)
        .map(|_| {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)
                .map_err(|_| Error::malformed("truncated shape"))?;
            usize::try_from(u64::from_le_bytes(b))
                .map_err(|_| Error::malformed("dimension exceeds address space"))
        })
        .collect()
}

fn read_planes<R: Read>(r: &mut R, len: usize) -> Result<[Vec<f64>; 4]> {
    let mut planes: [Vec<f64>; 4] = Default::default();
    let mut buf = vec![
        0u8;
        len.checked_mul(8)
            .ok_or_else(|| Error::malformed("too large"))?
    ];
    for p in planes.iter_mut() {
        r.read_exact(&mut buf)
            .map_err(|_| Error::malformed("truncated component data"))?;
        *p = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
    }
    Ok(planes)
}

/// Index bookkeeping for one mode: the flat buffer is viewed as
/// `inner x N_k x outer` blocks with `inner = Π_{m<k} N_m`.
struct ModeLayout {
    inner: usize,
    rows: usize,
    outer: usize,
    cols: usize,
}

impl ModeLayout {
    fn new(shape: &[usize], k: usize) -> Self {
        let inner: usize = shape[..k].iter().product();
        let outer: usize = shape[k + 1..].iter().product();
        ModeLayout {
            inner,
            rows: shape[k],
            outer,
            cols: inner * outer,
        }
    }

    fn gather(&self, flat: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; flat.len()];
        for u in 0..self.outer {
            for r in 0..self.rows {
                let src = (u * self.rows + r) * self.inner;
                for lo in 0..self.inner {
                    out[r + (lo + u * self.inner) * self.rows] = flat[src + lo];
                }
            }
        }
        out
    }

    fn scatter(&self, col_major: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; col_major.len()];
        for u in 0..self.outer {
            for r in 0..self.rows {
                let dst = (u * self.rows + r) * self.inner;
                for lo in 0..self.inner {
                    out[dst + lo] = col_major[r + (lo + u * self.inner) * self.rows];
                }
            }
        }
        out
    }
}
