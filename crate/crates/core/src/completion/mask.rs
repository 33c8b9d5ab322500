use std::io::{Read, Write};

use rand::seq::index;

use crate::error::{Error, Result};
use crate::linalg::QuaternionMatrix;
use crate::synth::rng;
use crate::tensor::{check_shape, flat_index, read_shape, QuaternionTensor};

pub const QMSK1_MAGIC: &[u8; 5] = b"QMSK1";

/// The observed index set Ω over a tensor shape, stored as one flag per
/// quaternion entry in flat (first-index-fastest) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    shape: Vec<usize>,
    observed: Vec<bool>,
    count: usize,
}

impl SamplingMask {
    pub fn full(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(SamplingMask {
            shape: shape.to_vec(),
            observed: vec![true; len],
            count: len,
        })
    }

    pub fn empty(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(SamplingMask {
            shape: shape.to_vec(),
            observed: vec![false; len],
            count: 0,
        })
    }

    pub fn from_flags(shape: &[usize], observed: Vec<bool>) -> Result<Self> {
        let len = check_shape(shape)?;
        if observed.len() != len {
            return Err(Error::shape(format!(
                "mask of shape {shape:?} needs {len} flags, got {}",
                observed.len()
            )));
        }
        let count = observed.iter().filter(|&&b| b).count();
        Ok(SamplingMask {
            shape: shape.to_vec(),
            observed,
            count,
        })
    }

    /// Mask from explicit multi-indices; rejects out-of-bounds and repeated indices.
    pub fn from_indices(shape: &[usize], indices: &[Vec<usize>]) -> Result<Self> {
        let mut mask = Self::empty(shape)?;
        for idx in indices {
            if idx.len() != shape.len() || idx.iter().zip(shape).any(|(&i, &n)| i >= n) {
                return Err(Error::arg(format!(
                    "index {idx:?} out of bounds for {shape:?}"
                )));
            }
            let l = flat_index(shape, idx);
            if std::mem::replace(&mut mask.observed[l], true) {
                return Err(Error::arg(format!("index {idx:?} listed twice")));
            }
            mask.count += 1;
        }
        Ok(mask)
    }

    /// Draws `round(sr · Π N_k)` distinct entries uniformly without
    /// replacement; the same seed always yields the same mask.
    pub fn generate(shape: &[usize], sr: f64, seed: u64) -> Result<Self> {
        if !(sr > 0.0 && sr <= 1.0) {
            return Err(Error::arg(format!(
                "sampling ratio must be in (0, 1], got {sr}"
            )));
        }
        let len = check_shape(shape)?;
        let count = ((sr * len as f64).round() as usize).min(len);
        let mut observed = vec![false; len];
        let mut r = rng(seed);
        for l in index::sample(&mut r, len, count) {
            observed[l] = true;
        }
        Ok(SamplingMask {
            shape: shape.to_vec(),
            observed,
            count,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// Number of observed entries `|Ω|`.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Sampling ratio `|Ω| / Π N_k`.
    pub fn sr(&self) -> f64 {
        self.count as f64 / self.len() as f64
    }

    pub fn flags(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_observed(&self, idx: &[usize]) -> bool {
        self.observed[flat_index(&self.shape, idx)]
    }

    pub fn is_observed_flat(&self, l: usize) -> bool {
        self.observed[l]
    }

    /// `P_Ω`: keeps observed entries, zeroes everything else.
    pub fn apply(&self, t: &QuaternionTensor) -> Result<QuaternionTensor> {
        self.check_tensor(t)?;
        let planes = std::array::from_fn(|c| {
            t.plane(c)
                .iter()
                .zip(&self.observed)
                .map(|(&v, &o)| if o { v } else { 0.0 })
                .collect()
        });
        QuaternionTensor::from_planes(&self.shape, planes)
    }

    pub fn apply_matrix(&self, m: &QuaternionMatrix) -> Result<QuaternionMatrix> {
        let t = self.apply(&QuaternionTensor::from_matrix(m))?;
        t.unfold(0)
    }

    pub fn check_tensor(&self, t: &QuaternionTensor) -> Result<()> {
        if t.shape() != self.shape.as_slice() {
            return Err(Error::shape(format!(
                "mask shape {:?} does not match data shape {:?}",
                self.shape,
                t.shape()
            )));
        }
        Ok(())
    }

    /// Reorders modes like [`QuaternionTensor::permute`].
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let as_tensor = QuaternionTensor::from_planes(
            &self.shape,
            [
                self.observed
                    .iter()
                    .map(|&b| if b { 1.0 } else { 0.0 })
                    .collect(),
                vec![0.0; self.len()],
                vec![0.0; self.len()],
                vec![0.0; self.len()],
            ],
        )?;
        let p = as_tensor.permute(perm)?;
        let flags = p.plane(0).iter().map(|&v| v != 0.0).collect();
        SamplingMask::from_flags(p.shape(), flags)
    }

    /// `QMSK1` format: magic, `u8` order, `u64` shape, then a bitmap over flat
    /// indices packed least-significant bit first.
    pub fn write_qmsk1<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(QMSK1_MAGIC)?;
        w.write_all(&[self.shape.len() as u8])?;
        for &n in &self.shape {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for (l, _) in self.observed.iter().enumerate().filter(|(_, &o)| o) {
            bytes[l / 8] |= 1 << (l % 8);
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_qmsk1<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)
            .map_err(|_| Error::malformed("truncated mask header"))?;
        if &magic != QMSK1_MAGIC {
            return Err(Error::malformed("missing QMSK1 magic"));
        }
        let shape = read_shape(&mut r)?;
        let len = check_shape(&shape)?;
        let mut bytes = vec![0u8; len.div_ceil(8)];
        r.read_exact(&mut bytes)
            .map_err(|_| Error::malformed("truncated mask bitmap"))?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::malformed("trailing bytes after mask bitmap"));
        }
        // padding bits past the last entry would name out-of-bounds indices
        if len % 8 != 0 && bytes[len / 8] >> (len % 8) != 0 {
            return Err(Error::malformed(
                "mask bitmap marks an index outside the shape",
            ));
        }
        let observed = (0..len)
            .map(|l| bytes[l / 8] & (1 << (l % 8)) != 0)
            .collect();
        SamplingMask::from_flags(&shape, observed)
    }
}
