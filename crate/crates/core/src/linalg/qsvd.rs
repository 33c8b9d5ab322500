//! Quaternion singular value decomposition through the complex adjoint.
//!
//! The SVD of `f(Q)` (2N₁ x 2N₂) has every singular value repeated twice. The
//! quaternion singular values are the odd-indexed ones, and a complex column
//! `(u₁; u₂)` maps to the quaternion vector `u₁ - conj(u₂)·j`.
//!
//! A backend is free to return any orthonormal basis of a degenerate singular
//! subspace, so the odd columns alone are not reliable once a quaternion
//! singular value repeats. Columns are therefore picked greedily inside each
//! cluster of equal singular values and orthogonalized against both the
//! accepted columns and their partners under `(u₁; u₂) ↦ (-conj(u₂); conj(u₁))`.
//! That partner is the complex image of right-multiplying by `j`, so the
//! accepted set is always the image of a unitary quaternion matrix.
//!
//! Right singular vectors are derived from the left ones as `f(Q)ᴴu/σ` so
//! that left and right factors stay paired inside degenerate clusters.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::matrix::QuaternionMatrix;
use crate::error::{Error, Result};

/// Threshold below which a singular value does not count toward the rank.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankTolerance {
    /// `1e-10 · σ_max · max(N₁, N₂)`.
    #[default]
    Auto,
    Absolute(f64),
}

impl RankTolerance {
    pub fn resolve(self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        match self {
            RankTolerance::Auto => 1e-10 * sigma_max * rows.max(cols) as f64,
            RankTolerance::Absolute(t) => t,
        }
    }
}

/// Full decomposition `Q = U·Λ·Vᴴ` with unitary `U` (N₁ x N₁) and `V` (N₂ x N₂).
#[derive(Debug, Clone)]
pub struct QsvdResult {
    pub u: QuaternionMatrix,
    /// Nonincreasing, length `min(N₁, N₂)`.
    pub singular_values: Vec<f64>,
    pub v: QuaternionMatrix,
    pub rank: usize,
}

impl QsvdResult {
    /// `U·Λ·Vᴴ` with `Λ` the rectangular diagonal of singular values.
    pub fn reconstruct(&self) -> QuaternionMatrix {
        let k = self.singular_values.len();
        let u = take_columns(&self.u, k);
        let v = take_columns(&self.v, k);
        scaled_outer(&u, &self.singular_values, &v)
    }
}

/// Thin factors for the leading singular triplets.
#[derive(Debug, Clone)]
pub struct QsvdFactors {
    pub u: QuaternionMatrix,
    pub singular_values: Vec<f64>,
    pub v: QuaternionMatrix,
}

struct ComplexSvd {
    u: DMatrix<Complex64>,
    sigma: DVector<f64>,
    /// Rows are conjugated right singular vectors.
    v_t: DMatrix<Complex64>,
}

fn check_input(q: &QuaternionMatrix) -> Result<()> {
    if q.rows() == 0 || q.cols() == 0 {
        return Err(Error::arg(
            "matrix must have at least one row and one column",
        ));
    }
    if q.planes().iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Decomposition(
            "matrix contains non-finite entries".into(),
        ));
    }
    Ok(())
}

fn max_sweeps(rows: usize, cols: usize) -> usize {
    // generous; the implicit QR sweeps converge in a few per singular value
    200 * rows.max(cols).max(8)
}

fn complex_svd(c: DMatrix<Complex64>, vectors: bool) -> Result<ComplexSvd> {
    let (r, k) = c.shape();
    let svd = nalgebra::SVD::try_new(c, vectors, vectors, f64::EPSILON, max_sweeps(r, k))
        .ok_or_else(|| Error::Decomposition("complex SVD did not converge".into()))?;
    let sigma = svd.singular_values;
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::Decomposition(
            "complex SVD produced non-finite values".into(),
        ));
    }
    Ok(ComplexSvd {
        u: svd.u.unwrap_or_else(|| DMatrix::zeros(0, 0)),
        sigma,
        v_t: svd.v_t.unwrap_or_else(|| DMatrix::zeros(0, 0)),
    })
}

/// Singular values of the complex adjoint `f(Q)`, nonincreasing, length `2·min(N₁, N₂)`.
pub fn adjoint_singular_values(q: &QuaternionMatrix) -> Result<Vec<f64>> {
    check_input(q)?;
    // same kernel as `svt`, so thresholds compare against identical values
    let svd = complex_svd(q.complex_adjoint(), true)?;
    Ok(svd.sigma.iter().copied().collect())
}

/// Quaternion singular values, nonincreasing, length `min(N₁, N₂)`.
pub fn singular_values(q: &QuaternionMatrix) -> Result<Vec<f64>> {
    Ok(adjoint_singular_values(q)?.into_iter().step_by(2).collect())
}

/// Sum of the quaternion singular values.
pub fn nuclear_norm(q: &QuaternionMatrix) -> Result<f64> {
    Ok(singular_values(q)?.iter().sum())
}

/// Number of singular values above the resolved tolerance.
pub fn rank(q: &QuaternionMatrix, tol: RankTolerance) -> Result<usize> {
    let s = singular_values(q)?;
    Ok(count_above(&s, tol.resolve(s[0], q.rows(), q.cols())))
}

fn count_above(s: &[f64], tol: f64) -> usize {
    s.iter().filter(|&&v| v > tol).count()
}

/// Full quaternion SVD.
pub fn qsvd(q: &QuaternionMatrix, tol: RankTolerance) -> Result<QsvdResult> {
    if let RankTolerance::Absolute(t) = tol {
        if !(t >= 0.0) {
            return Err(Error::arg(format!("rank tolerance must be >= 0, got {t}")));
        }
    }
    check_input(q)?;
    let (m, n) = q.shape();
    let c = q.complex_adjoint();
    let svd = complex_svd(c.clone(), true)?;
    let p = m.min(n);
    let sigma: Vec<f64> = svd.sigma.iter().copied().step_by(2).collect();

    let (mut ubasis, mut vbasis) = extract_pairs(&c, &svd, &sigma, p);
    ubasis.complete(m);
    vbasis.complete(n);

    let rank = count_above(&sigma, tol.resolve(sigma[0], m, n));
    Ok(QsvdResult {
        u: ubasis.to_quaternion(),
        singular_values: sigma,
        v: vbasis.to_quaternion(),
        rank,
    })
}

/// Leading `keep` singular triplets (`keep` is clamped to `min(N₁, N₂)`).
pub fn qsvd_factors(q: &QuaternionMatrix, keep: usize) -> Result<QsvdFactors> {
    check_input(q)?;
    let c = q.complex_adjoint();
    let svd = complex_svd(c.clone(), true)?;
    let sigma: Vec<f64> = svd.sigma.iter().copied().step_by(2).collect();
    let keep = keep.min(sigma.len());
    let (ubasis, vbasis) = extract_pairs(&c, &svd, &sigma, keep);
    Ok(QsvdFactors {
        u: ubasis.to_quaternion(),
        singular_values: sigma[..keep].to_vec(),
        v: vbasis.to_quaternion(),
    })
}

/// Singular value thresholding `U·diag(max(σ - xi, 0))·Vᴴ`, the minimizer of
/// `xi·‖X‖_* + ½‖X - Q‖_F²`.
pub fn svt(q: &QuaternionMatrix, xi: f64) -> Result<QuaternionMatrix> {
    if !(xi >= 0.0) {
        return Err(Error::arg(format!("threshold must be >= 0, got {xi}")));
    }
    if xi == 0.0 {
        return Ok(q.clone());
    }
    check_input(q)?;
    let c = q.complex_adjoint();
    let svd = complex_svd(c.clone(), true)?;
    let sigma: Vec<f64> = svd.sigma.iter().copied().step_by(2).collect();
    let keep = count_above(&sigma, xi);
    if keep == 0 {
        return Ok(QuaternionMatrix::zeros(q.rows(), q.cols()));
    }
    let (ubasis, vbasis) = extract_pairs(&c, &svd, &sigma, keep);
    let shrunk: Vec<f64> = sigma[..keep].iter().map(|s| s - xi).collect();
    Ok(scaled_outer(
        &ubasis.to_quaternion(),
        &shrunk,
        &vbasis.to_quaternion(),
    ))
}

/// Writes a spectrum as CSV, one value per line.
pub fn write_spectrum_csv<W: Write>(mut out: W, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        writeln!(out, "{v:e}")?;
    }
    Ok(())
}

fn take_columns(q: &QuaternionMatrix, k: usize) -> QuaternionMatrix {
    let planes = std::array::from_fn(|c| q.plane(c).columns(0, k).into_owned());
    QuaternionMatrix::from_planes(planes).expect("columns share a shape")
}

/// `U·diag(s)·Vᴴ` for thin factors.
fn scaled_outer(u: &QuaternionMatrix, s: &[f64], v: &QuaternionMatrix) -> QuaternionMatrix {
    let mut us = u.clone();
    for c in 0..4 {
        for (k, &sk) in s.iter().enumerate() {
            us.plane_mut(c).column_mut(k).scale_mut(sk);
        }
    }
    us.matmul(&v.conj_transpose())
        .expect("thin factors agree on inner dimension")
}

/// Picks structured left/right columns for the first `keep` quaternion singular values.
fn extract_pairs(
    c: &DMatrix<Complex64>,
    svd: &ComplexSvd,
    sigma: &[f64],
    keep: usize,
) -> (StructuredBasis, StructuredBasis) {
    let (two_m, two_n) = c.shape();
    let mut ubasis = StructuredBasis::new(two_m / 2);
    let mut vbasis = StructuredBasis::new(two_n / 2);
    if keep == 0 {
        return (ubasis, vbasis);
    }
    let sigma_max = sigma[0];
    let cluster_tol = 1e-8 * sigma_max;
    let derive_floor = f64::EPSILON * sigma_max * (two_m.max(two_n) as f64);

    let mut start = 0;
    while start < keep {
        let mut end = start + 1;
        while end < sigma.len() && sigma[end - 1] - sigma[end] <= cluster_tol {
            end += 1;
        }
        let take = end.min(keep) - start;
        let candidates: Vec<DVector<Complex64>> = (2 * start..2 * end)
            .map(|col| svd.u.column(col).into_owned())
            .collect();
        ubasis.absorb_greedy(candidates, take);
        ubasis.complete(start + take);
        start = end;
    }

    // right vectors paired with the accepted left ones; slot k holds the
    // index into vbasis.cols of the partner of left column k
    let mut slots: Vec<Option<usize>> = Vec::with_capacity(keep);
    for (k, &s) in sigma.iter().enumerate().take(keep) {
        let slot = if s > derive_floor {
            let w = c.ad_mul(&ubasis.cols[k]).unscale(s);
            vbasis.try_push(w).then(|| vbasis.len() - 1)
        } else {
            None
        };
        slots.push(slot);
    }
    let holes: Vec<usize> = (0..keep).filter(|&k| slots[k].is_none()).collect();
    if !holes.is_empty() {
        // only near-null singular values end up here, so any orthonormal
        // completion keeps the reconstruction error at rounding level
        let candidates: Vec<DVector<Complex64>> = holes
            .iter()
            .flat_map(|&k| [2 * k, 2 * k + 1])
            .map(|row| svd.v_t.row(row).transpose().map(|z| z.conj()))
            .collect();
        let before = vbasis.len();
        vbasis.absorb_greedy(candidates, holes.len());
        vbasis.complete(before + holes.len());
        for (i, &k) in holes.iter().enumerate() {
            slots[k] = Some(before + i);
        }
    }
    let mut cols: Vec<Option<DVector<Complex64>>> = std::mem::take(&mut vbasis.cols)
        .into_iter()
        .map(Some)
        .collect();
    vbasis.cols = slots
        .into_iter()
        .map(|slot| {
            cols[slot.expect("every slot filled")]
                .take()
                .expect("slots are distinct")
        })
        .collect();
    (ubasis, vbasis)
}

/// Orthonormal complex columns closed under the `j`-partner map.
struct StructuredBasis {
    half: usize,
    cols: Vec<DVector<Complex64>>,
}

fn partner(c: &DVector<Complex64>) -> DVector<Complex64> {
    let h = c.len() / 2;
    DVector::from_fn(2 * h, |r, _| {
        if r < h {
            -c[r + h].conj()
        } else {
            c[r - h].conj()
        }
    })
}

impl StructuredBasis {
    fn new(half: usize) -> Self {
        StructuredBasis {
            half,
            cols: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.cols.len()
    }

    fn project_out(&self, v: &mut DVector<Complex64>) {
        // twice is enough for orthogonality to working precision
        for _ in 0..2 {
            for c in &self.cols {
                let jc = partner(c);
                let a = c.dotc(v);
                v.axpy(-a, c, Complex64::new(1.0, 0.0));
                let b = jc.dotc(v);
                v.axpy(-b, &jc, Complex64::new(1.0, 0.0));
            }
        }
    }

    /// Orthogonalizes and accepts `v` unless it is mostly inside the current span.
    fn try_push(&mut self, mut v: DVector<Complex64>) -> bool {
        let before = v.norm();
        self.project_out(&mut v);
        let after = v.norm();
        if !(after > 0.5 * before) || after == 0.0 {
            return false;
        }
        self.cols.push(v.unscale(after));
        true
    }

    /// Accepts `take` columns, each time the candidate with the largest
    /// residual after orthogonalization.
    fn absorb_greedy(&mut self, candidates: Vec<DVector<Complex64>>, take: usize) {
        let mut residuals: Vec<DVector<Complex64>> = candidates
            .into_iter()
            .map(|mut v| {
                self.project_out(&mut v);
                v
            })
            .collect();
        for _ in 0..take {
            let best = residuals
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.norm()))
                .fold(None, |acc: Option<(usize, f64)>, (i, nrm)| match acc {
                    Some((_, b)) if b >= nrm => acc,
                    _ => Some((i, nrm)),
                });
            let Some((idx, nrm)) = best else { break };
            if nrm < 1e-3 {
                // cluster subspace exhausted numerically; let completion fill in
                break;
            }
            let mut w = residuals.swap_remove(idx);
            self.project_out(&mut w);
            let nw = w.norm();
            let w = w.unscale(nw);
            let jw = partner(&w);
            for r in residuals.iter_mut() {
                let a = w.dotc(r);
                r.axpy(-a, &w, Complex64::new(1.0, 0.0));
                let b = jw.dotc(r);
                r.axpy(-b, &jw, Complex64::new(1.0, 0.0));
            }
            self.cols.push(w);
        }
    }

    /// Extends the basis to `target` quaternion columns using the orthogonal
    /// projector onto the complement, picking its largest diagonal entry each step.
    fn complete(&mut self, target: usize) {
        if self.cols.len() >= target {
            return;
        }
        let dim = 2 * self.half;
        let mut proj = DMatrix::<Complex64>::identity(dim, dim);
        let one = Complex64::new(1.0, 0.0);
        for c in &self.cols {
            let jc = partner(c);
            proj.ger(-one, c, &c.map(|z| z.conj()), one);
            proj.ger(-one, &jc, &jc.map(|z| z.conj()), one);
        }
        while self.cols.len() < target {
            let (idx, _) = (0..dim)
                .map(|i| (i, proj[(i, i)].re))
                .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
            let mut w: DVector<Complex64> = proj.column(idx).into_owned();
            self.project_out(&mut w);
            let nw = w.norm();
            let w = w.unscale(nw);
            let jw = partner(&w);
            proj.ger(-one, &w, &w.map(|z| z.conj()), one);
            proj.ger(-one, &jw, &jw.map(|z| z.conj()), one);
            self.cols.push(w);
        }
    }

    /// Column `(u₁; u₂)` becomes the quaternion column `u₁ - conj(u₂)·j`.
    fn to_quaternion(&self) -> QuaternionMatrix {
        let h = self.half;
        let k = self.cols.len();
        let mut planes: [DMatrix<f64>; 4] = std::array::from_fn(|_| DMatrix::zeros(h, k));
        for (j, col) in self.cols.iter().enumerate() {
            for i in 0..h {
                let up = col[i];
                let low = col[i + h];
                planes[0][(i, j)] = up.re;
                planes[1][(i, j)] = up.im;
                planes[2][(i, j)] = -low.re;
                planes[3][(i, j)] = low.im;
            }
        }
        QuaternionMatrix::from_planes(planes).expect("planes share a shape")
    }
}
