//! Sampling masks and the ADMM completion solvers.

mod checkpoint;
mod config;
mod mask;
mod solver;

pub use checkpoint::QCKP1_MAGIC;
pub use config::{
    SolverConfig, TriggerMode, DEFAULT_EPSILON, DEFAULT_ETA0, DEFAULT_ETA_TRIGGER, DEFAULT_MAX_ITER,
};
pub use mask::{SamplingMask, QMSK1_MAGIC};
pub use solver::{
    lrc_qm, lrc_qt, update_beta, update_f, update_t, update_x, IterationInfo, Solver, SolverReport,
    SolverState,
};
