use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the stopping tolerance and the β-growth trigger are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriggerMode {
    /// Raw Frobenius norm of the iterate change.
    Absolute,
    /// Iterate change divided by `‖P_Ω(Y)‖_F`.
    #[default]
    Relative,
}

impl std::str::FromStr for TriggerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(TriggerMode::Absolute),
            "relative" => Ok(TriggerMode::Relative),
            other => Err(Error::arg(format!("unknown trigger mode {other:?}"))),
        }
    }
}

/// ADMM hyperparameters, one `alpha`/`beta0`/`beta_max` slot per penalized mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Nuclear-norm weight per mode; used as given, not normalized.
    pub alpha: Vec<f64>,
    /// Initial penalty per mode.
    pub beta0: Vec<f64>,
    /// Penalty ceiling per mode.
    pub beta_max: Vec<f64>,
    /// Penalty growth factor applied when the trigger fires.
    pub eta0: f64,
    /// Iterate-change level at or below which the penalty grows.
    pub eta_trigger: f64,
    /// Stopping tolerance on the iterate change.
    pub epsilon: f64,
    pub max_iter: usize,
    pub trigger_mode: TriggerMode,
}

pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_ETA0: f64 = 1.05;
pub const DEFAULT_ETA_TRIGGER: f64 = 0.01;
pub const DEFAULT_EPSILON: f64 = 1e-3;

impl SolverConfig {
    /// Defaults for third-order tensors (color video).
    pub fn tensor_default() -> Self {
        SolverConfig {
            alpha: vec![2.0, 2.0, 1e-3],
            beta0: vec![0.08, 0.08, 1.0],
            beta_max: vec![1e3, 1e3, 1e3],
            ..Self::matrix_default()
        }
    }

    /// Defaults for a single quaternion matrix (color image).
    pub fn matrix_default() -> Self {
        SolverConfig {
            alpha: vec![2.0],
            beta0: vec![0.08],
            beta_max: vec![1e3],
            eta0: DEFAULT_ETA0,
            eta_trigger: DEFAULT_ETA_TRIGGER,
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
            trigger_mode: TriggerMode::Relative,
        }
    }

    /// Tensor defaults exist only for order 3; other orders must be configured explicitly.
    pub fn default_for_order(order: usize) -> Result<Self> {
        match order {
            3 => Ok(Self::tensor_default()),
            n => Err(Error::arg(format!(
                "no default weights for order-{n} tensors; pass alpha and beta0 explicitly"
            ))),
        }
    }

    pub fn modes(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        for (name, v) in [
            ("alpha", &self.alpha),
            ("beta0", &self.beta0),
            ("beta_max", &self.beta_max),
        ] {
            if v.len() != modes {
                return Err(Error::arg(format!(
                    "{name} needs {modes} entries, got {}",
                    v.len()
                )));
            }
        }
        if self.alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::arg("alpha entries must be finite and >= 0"));
        }
        if self.beta0.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::arg("beta0 entries must be finite and > 0"));
        }
        if self
            .beta0
            .iter()
            .zip(&self.beta_max)
            .any(|(b, m)| !(m.is_finite() && b <= m))
        {
            return Err(Error::arg("beta0 must not exceed beta_max"));
        }
        if !(self.eta0.is_finite() && self.eta0 > 1.0) {
            return Err(Error::arg(format!("eta0 must be > 1, got {}", self.eta0)));
        }
        if !(self.eta_trigger.is_finite() && self.eta_trigger > 0.0) {
            return Err(Error::arg("eta_trigger must be > 0"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::arg("epsilon must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(Error::arg("max_iter must be positive"));
        }
        Ok(())
    }
}
