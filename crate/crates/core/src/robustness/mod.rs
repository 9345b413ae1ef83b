//! Timing-jitter Monte Carlo, systematic drift sweeps and closed-form error budgets.

mod budgets;
mod drift;
mod jitter;
mod noise;

pub use budgets::{
    dephasing_error, finite_duration_budget, heating_error, sdk_error_bound, FidelityBound,
};
pub use drift::{
    frequency_drift_sweep, infer_groups, reprate_drift_sweep, reprate_drifted, DriftAxis,
    DriftScale,
};
pub use jitter::{jitter_monte_carlo, jitter_sweep};
pub use noise::{log_log_slope, ClampRule, NoiseKind, NoiseSpec, SweepPoint, SweepResult};
