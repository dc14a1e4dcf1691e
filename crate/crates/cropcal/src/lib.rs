//! Crop-model calibration toolkit: a daily LAI growth simulator, ensemble
//! Kalman filter assimilation, a multi-mutation differential-evolution
//! optimizer with adaptive operator selection, four comparison optimizers,
//! and an experiment harness with deterministic seeded runs.

pub mod baselines;
pub mod core;
pub mod demmogc;
pub mod enkf;
pub mod harness;
pub mod metrics;
pub mod mutation;
pub mod wofost;
