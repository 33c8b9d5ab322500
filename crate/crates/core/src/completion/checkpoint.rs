use std::io::{Read, Write};

use super::solver::SolverState;
use crate::error::{Error, Result};
use crate::tensor::{QuaternionTensor, MAX_ORDER};

pub const QCKP1_MAGIC: &[u8; 5] = b"QCKP1";

impl SolverState {
    /// `QCKP1` container: magic, `u64` τ, `u8` mode count, one `u8` per mode,
    /// `f64` β per mode, then `T` and each `X`, `F` pair as `qt1` blobs.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        self.validate()?;
        w.write_all(QCKP1_MAGIC)?;
        w.write_all(&(self.tau as u64).to_le_bytes())?;
        w.write_all(&[self.modes.len() as u8])?;
        for &m in &self.modes {
            w.write_all(&[m as u8])?;
        }
        for &b in &self.beta {
            w.write_all(&b.to_le_bytes())?;
        }
        self.t.write_qt1(&mut w)?;
        for (x, f) in self.x.iter().zip(&self.f) {
            QuaternionTensor::from_matrix(x).write_qt1(&mut w)?;
            QuaternionTensor::from_matrix(f).write_qt1(&mut w)?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)
            .map_err(|_| Error::malformed("truncated checkpoint header"))?;
        if &magic != QCKP1_MAGIC {
            return Err(Error::malformed("missing QCKP1 magic"));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)
            .map_err(|_| Error::malformed("truncated checkpoint header"))?;
        let tau = usize::try_from(u64::from_le_bytes(u64buf))
            .map_err(|_| Error::malformed("iteration count out of range"))?;
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)
            .map_err(|_| Error::malformed("truncated checkpoint header"))?;
        let n = byte[0] as usize;
        if n == 0 || n > MAX_ORDER {
            return Err(Error::malformed(format!("invalid mode count {n}")));
        }
        let mut modes = vec![0u8; n];
        r.read_exact(&mut modes)
            .map_err(|_| Error::malformed("truncated mode list"))?;
        let mut beta = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut u64buf)
                .map_err(|_| Error::malformed("truncated beta vector"))?;
            beta.push(f64::from_le_bytes(u64buf));
        }
        let t = QuaternionTensor::read_qt1(&mut r)?;
        let mut x = Vec::with_capacity(n);
        let mut f = Vec::with_capacity(n);
        for _ in 0..n {
            x.push(read_matrix(&mut r)?);
            f.push(read_matrix(&mut r)?);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::malformed("trailing bytes after checkpoint"));
        }
        let state = SolverState {
            t,
            modes: modes.into_iter().map(usize::from).collect(),
            x,
            f,
            beta,
            tau,
        };
        state
            .validate()
            .map_err(|e| Error::malformed(format!("inconsistent checkpoint: {e}")))?;
        Ok(state)
    }
}

fn read_matrix<R: Read>(r: &mut R) -> Result<crate::QuaternionMatrix> {
    let t = QuaternionTensor::read_qt1(r)?;
    if t.order() != 2 {
        return Err(Error::malformed(
            "checkpoint matrices must be order-2 blobs",
        ));
    }
    t.unfold(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{SamplingMask, Solver, SolverConfig};
    use crate::synth::{pure_tucker_tensor, rng};

    #[test]
    fn checkpoint_round_trip_and_resume() {
        let mut r = rng(11);
        let truth = pure_tucker_tensor(&mut r, &[8, 7, 5], &[2, 2, 2]).unwrap();
        let mask = SamplingMask::generate(truth.shape(), 0.6, 4).unwrap();
        let y = mask.apply(&truth).unwrap();
        let cfg = SolverConfig {
            max_iter: 6,
            ..SolverConfig::tensor_default()
        };

        let init = SolverState::initial(y.shape(), vec![0, 1, 2], &cfg).unwrap();
        let (mid, _) = Solver::new(cfg.clone())
            .run(&y, &mask, init.clone())
            .unwrap();
        let mut buf = Vec::new();
        mid.write_checkpoint(&mut buf).unwrap();
        let back = SolverState::read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back, mid);

        // 6 + 6 resumed iterations equal 12 straight ones
        let (resumed, _) = Solver::new(cfg.clone()).run(&y, &mask, back).unwrap();
        let long = SolverConfig {
            max_iter: 12,
            ..cfg.clone()
        };
        let (straight, _) = Solver::new(long).run(&y, &mask, init).unwrap();
        assert_eq!(resumed, straight);
        assert_eq!(resumed.tau, 12);
    }

    #[test]
    fn rejects_corrupt_checkpoints() {
        let cfg = SolverConfig::matrix_default();
        let s = SolverState::initial(&[3, 4], vec![0], &cfg).unwrap();
        let mut buf = Vec::new();
        s.write_checkpoint(&mut buf).unwrap();
        assert_eq!(SolverState::read_checkpoint(&buf[..]).unwrap(), s);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(SolverState::read_checkpoint(&bad[..]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(SolverState::read_checkpoint(&long[..]).is_err());
        let short = &buf[..buf.len() - 3];
        assert!(SolverState::read_checkpoint(short).is_err());
        // mode index beyond the tensor order
        let mut wrong_mode = buf.clone();
        wrong_mode[14] = 5;
        assert!(SolverState::read_checkpoint(&wrong_mode[..]).is_err());
    }
}
