//! ADMM for low-rank quaternion tensor and matrix completion.
//!
//! One iteration, for every penalized mode `n`:
//!
//! 1. `T ← P_Ωᶜ((1/N) Σ_n fold_n(X_n - F_n/β_n)) + Y`
//! 2. `X_n ← svt(T_(n) + F_n/β_n, α_n/β_n)`
//! 3. `F_n ← F_n - β_n (X_n - T_(n))`
//! 4. `β_n ← min(β_max_n, η β_n)` with `η = η₀` when `‖ΔT‖_F` is at or
//!    below the trigger, else `η = 1`.
//!
//! The loop stops once `‖ΔT‖_F ≤ ε` or after `max_iter` iterations. Steps 2
//! and 3 are independent across modes and run on the rayon pool; results do
//! not depend on the thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{SolverConfig, TriggerMode};
use super::mask::SamplingMask;
use crate::error::{Error, Result};
use crate::linalg::{svt, QuaternionMatrix};
use crate::tensor::QuaternionTensor;

/// Iterate of the ADMM loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Current estimate; all zeros before the first iteration.
    pub t: QuaternionTensor,
    /// Tensor modes carrying a nuclear-norm term (all modes for tensors, `[0]` for matrices).
    pub modes: Vec<usize>,
    /// Auxiliary unfoldings, one per entry of `modes`.
    pub x: Vec<QuaternionMatrix>,
    /// Lagrange multipliers, one per entry of `modes`.
    pub f: Vec<QuaternionMatrix>,
    pub beta: Vec<f64>,
    pub tau: usize,
}

impl SolverState {
    /// `X = F = 0`, `β = β⁰`, `τ = 0`.
    pub fn initial(shape: &[usize], modes: Vec<usize>, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(modes.len())?;
        let t = QuaternionTensor::zeros(shape)?;
        let mut seen = vec![false; shape.len()];
        for &m in &modes {
            if m >= shape.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidMode {
                    mode: m,
                    order: shape.len(),
                });
            }
        }
        let zeros: Vec<QuaternionMatrix> = modes
            .iter()
            .map(|&m| {
                let rows = shape[m];
                QuaternionMatrix::zeros(rows, t.len() / rows)
            })
            .collect();
        Ok(SolverState {
            t,
            modes,
            x: zeros.clone(),
            f: zeros,
            beta: cfg.beta0.clone(),
            tau: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.modes.len();
        if self.x.len() != n || self.f.len() != n || self.beta.len() != n {
            return Err(Error::shape("state needs one X, F and beta per mode"));
        }
        for (i, &m) in self.modes.iter().enumerate() {
            if m >= self.t.order() {
                return Err(Error::InvalidMode {
                    mode: m,
                    order: self.t.order(),
                });
            }
            let expect = (self.t.shape()[m], self.t.len() / self.t.shape()[m]);
            if self.x[i].shape() != expect || self.f[i].shape() != expect {
                return Err(Error::shape(format!(
                    "mode-{m} variables must be {}x{}",
                    expect.0, expect.1
                )));
            }
        }
        if self.beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::arg("beta entries must be finite and > 0"));
        }
        Ok(())
    }
}

/// Convergence record of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// `‖T^(τ+1) - T^(τ)‖_F` per iteration (absolute).
    pub delta_history: Vec<f64>,
    /// β after each iteration's update.
    pub beta_history: Vec<Vec<f64>>,
    pub wall_time: f64,
    pub converged: bool,
}

/// Per-iteration progress passed to the callback.
#[derive(Debug, Clone, Copy)]
pub struct IterationInfo<'a> {
    pub tau: usize,
    pub delta: f64,
    pub beta: &'a [f64],
}

/// Step 1: the mode-averaged estimate on unobserved entries, `Y` on observed ones.
pub fn update_t(
    state: &SolverState,
    mask: &SamplingMask,
    y: &QuaternionTensor,
) -> Result<QuaternionTensor> {
    mask.check_tensor(y)?;
    state.t.check_same_shape(y)?;
    let shape = y.shape();
    let terms: Vec<QuaternionTensor> = (0..state.modes.len())
        .map(|i| {
            let m = state.x[i].add_scaled(-1.0 / state.beta[i], &state.f[i])?;
            QuaternionTensor::fold(&m, state.modes[i], shape)
        })
        .collect::<Result<_>>()?;
    let inv_n = 1.0 / terms.len() as f64;
    let planes = std::array::from_fn(|c| {
        let parts: Vec<&[f64]> = terms.iter().map(|t| t.plane(c)).collect();
        (0..y.len())
            .map(|l| {
                if mask.is_observed_flat(l) {
                    y.plane(c)[l]
                } else {
                    pairwise_sum(&parts, l) * inv_n
                }
            })
            .collect()
    });
    QuaternionTensor::from_planes(shape, planes)
}

/// Fixed-order pairwise sum of `parts[..][l]`.
fn pairwise_sum(parts: &[&[f64]], l: usize) -> f64 {
    match parts.len() {
        0 => 0.0,
        1 => parts[0][l],
        n => {
            let (a, b) = parts.split_at(n / 2);
            pairwise_sum(a, l) + pairwise_sum(b, l)
        }
    }
}

/// Step 2 for the `i`-th penalized mode, using `state.t` as the fresh estimate.
pub fn update_x(state: &SolverState, i: usize, cfg: &SolverConfig) -> Result<QuaternionMatrix> {
    let beta = state.beta[i];
    if !(beta > 0.0) {
        return Err(Error::arg("beta must be positive"));
    }
    let unfolded = state.t.unfold(state.modes[i])?;
    let arg = unfolded.add_scaled(1.0 / beta, &state.f[i])?;
    svt(&arg, cfg.alpha[i] / beta)
}

/// Step 3 for the `i`-th penalized mode: `F - β (X - T_(n))`.
pub fn update_f(state: &SolverState, i: usize) -> Result<QuaternionMatrix> {
    let unfolded = state.t.unfold(state.modes[i])?;
    let residual = state.x[i].sub(&unfolded)?;
    state.f[i].add_scaled(-state.beta[i], &residual)
}

/// Step 4. `delta` is the absolute change `‖T^(τ+1) - T^(τ)‖_F`; `scale` is
/// the reference norm used in relative trigger mode.
pub fn update_beta(beta: &[f64], delta: f64, scale: f64, cfg: &SolverConfig) -> Vec<f64> {
    let measured = match cfg.trigger_mode {
        TriggerMode::Absolute => delta,
        TriggerMode::Relative => delta / scale,
    };
    let eta = if measured <= cfg.eta_trigger {
        cfg.eta0
    } else {
        1.0
    };
    beta.iter()
        .zip(&cfg.beta_max)
        .map(|(&b, &bmax)| bmax.min(eta * b))
        .collect()
}

fn reference_scale(y: &QuaternionTensor, mode: TriggerMode) -> f64 {
    match mode {
        TriggerMode::Absolute => 1.0,
        TriggerMode::Relative => {
            let n = y.frobenius();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        }
    }
}

type ProgressFn<'a> = Box<dyn FnMut(IterationInfo<'_>) + 'a>;

/// Configurable ADMM driver shared by the tensor and matrix entry points.
pub struct Solver<'a> {
    cfg: SolverConfig,
    threads: Option<usize>,
    progress: Option<ProgressFn<'a>>,
}

impl<'a> Solver<'a> {
    pub fn new(cfg: SolverConfig) -> Self {
        Solver {
            cfg,
            threads: None,
            progress: None,
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Caps the number of worker threads for the per-mode updates; `1` runs serially.
    pub fn threads(mut self, n: usize) -> Self {
        self.threads = Some(n.max(1));
        self
    }

    pub fn on_iteration(mut self, f: impl FnMut(IterationInfo<'_>) + 'a) -> Self {
        self.progress = Some(Box::new(f));
        self
    }

    /// Completes a tensor with a nuclear-norm term on every mode.
    pub fn complete_tensor(
        &mut self,
        y: &QuaternionTensor,
        mask: &SamplingMask,
    ) -> Result<(QuaternionTensor, SolverReport)> {
        let state = SolverState::initial(y.shape(), (0..y.order()).collect(), &self.cfg)?;
        let (state, report) = self.run(y, mask, state)?;
        Ok((state.t, report))
    }

    /// Completes a single quaternion matrix.
    pub fn complete_matrix(
        &mut self,
        y: &QuaternionMatrix,
        mask: &SamplingMask,
    ) -> Result<(QuaternionMatrix, SolverReport)> {
        let yt = QuaternionTensor::from_matrix(y);
        let state = SolverState::initial(yt.shape(), vec![0], &self.cfg)?;
        let (state, report) = self.run(&yt, mask, state)?;
        Ok((state.t.unfold(0)?, report))
    }

    /// Runs up to `max_iter` further iterations from `state`. Entries of `y`
    /// outside the mask are ignored.
    pub fn run(
        &mut self,
        y: &QuaternionTensor,
        mask: &SamplingMask,
        mut state: SolverState,
    ) -> Result<(SolverState, SolverReport)> {
        self.cfg.validate(state.modes.len())?;
        state.validate()?;
        let y = mask.apply(y)?;
        state.t.check_same_shape(&y)?;
        let scale = reference_scale(&y, self.cfg.trigger_mode);
        let epsilon = match self.cfg.trigger_mode {
            TriggerMode::Absolute => self.cfg.epsilon,
            TriggerMode::Relative => self.cfg.epsilon * scale,
        };

        let pool = match self.threads {
            Some(n) if n > 1 => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::arg(format!("thread pool: {e}")))?,
            ),
            _ => None,
        };

        let start = Instant::now();
        let mut report = SolverReport {
            iterations: 0,
            delta_history: Vec::new(),
            beta_history: Vec::new(),
            wall_time: 0.0,
            converged: false,
        };
        for _ in 0..self.cfg.max_iter {
            let t_next = update_t(&state, mask, &y)?;
            let delta = t_next.sub(&state.t)?.frobenius();
            state.t = t_next;

            let per_mode = |i: usize| -> Result<(QuaternionMatrix, QuaternionMatrix)> {
                let x = update_x(&state, i, &self.cfg)?;
                let unfolded = state.t.unfold(state.modes[i])?;
                let f = state.f[i].add_scaled(-state.beta[i], &x.sub(&unfolded)?)?;
                Ok((x, f))
            };
            let updates: Vec<(QuaternionMatrix, QuaternionMatrix)> = match (&pool, self.threads) {
                (Some(pool), _) => pool.install(|| {
                    (0..state.modes.len())
                        .into_par_iter()
                        .map(per_mode)
                        .collect::<Result<_>>()
                })?,
                (None, Some(_)) => (0..state.modes.len())
                    .map(per_mode)
                    .collect::<Result<_>>()?,
                (None, None) => (0..state.modes.len())
                    .into_par_iter()
                    .map(per_mode)
                    .collect::<Result<_>>()?,
            };
            for (i, (x, f)) in updates.into_iter().enumerate() {
                state.x[i] = x;
                state.f[i] = f;
            }
            state.beta = update_beta(&state.beta, delta, scale, &self.cfg);
            state.tau += 1;

            report.iterations += 1;
            report.delta_history.push(delta);
            report.beta_history.push(state.beta.clone());
            if let Some(cb) = self.progress.as_mut() {
                cb(IterationInfo {
                    tau: state.tau,
                    delta,
                    beta: &state.beta,
                });
            }
            if delta <= epsilon {
                report.converged = true;
                break;
            }
        }
        report.wall_time = start.elapsed().as_secs_f64();
        Ok((state, report))
    }
}

/// Low-rank quaternion tensor completion with default threading.
pub fn lrc_qt(
    y: &QuaternionTensor,
    mask: &SamplingMask,
    cfg: &SolverConfig,
) -> Result<(QuaternionTensor, SolverReport)> {
    Solver::new(cfg.clone()).complete_tensor(y, mask)
}

/// Low-rank quaternion matrix completion; `cfg` carries a single mode slot.
pub fn lrc_qm(
    y: &QuaternionMatrix,
    mask: &SamplingMask,
    cfg: &SolverConfig,
) -> Result<(QuaternionMatrix, SolverReport)> {
    Solver::new(cfg.clone()).complete_matrix(y, mask)
}
