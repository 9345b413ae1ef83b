use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate_dynamics::PhaseTarget;
use crate::ion_physics::TrapSetup;

/// How the SDK-count penalty enters the stage-1 cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum J1Form {
    /// ε + c₁(tanh(c₂[𝒩 − (𝒩_max+1)]) + 1).
    #[default]
    Additive,
    /// ε·c₁(tanh(c₂[𝒩 − (𝒩_max+1)]) + 1).
    Multiplicative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub trap: TrapSetup,
    /// Requested gate time τ_G (s); the realized span never exceeds it.
    pub gate_time: f64,
    #[serde(default = "defaults::n_groups")]
    pub n_groups: usize,
    #[serde(default = "defaults::z_max")]
    pub z_max: u32,
    /// Ceiling of the iterated SDK-count cap 𝒩_max.
    #[serde(default = "defaults::n_max")]
    pub n_max: u32,
    /// First 𝒩_max tried.
    #[serde(default = "defaults::n_max_start")]
    pub n_max_start: u32,
    #[serde(default = "defaults::min_separation")]
    pub min_separation: f64,
    #[serde(default = "defaults::ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default = "defaults::target_infidelity")]
    pub target_infidelity: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::c1")]
    pub penalty_c1_stage1: f64,
    #[serde(default = "defaults::c2_stage1")]
    pub penalty_c2_stage1: f64,
    #[serde(default = "defaults::c1")]
    pub penalty_c1_stage2: f64,
    #[serde(default = "defaults::c2_stage2")]
    pub penalty_c2_stage2: f64,
    #[serde(default)]
    pub j1_form: J1Form,
    /// δ in the smoothed count Σ√(z² + δ²).
    #[serde(default = "defaults::smoothing")]
    pub smoothing: f64,
    #[serde(default = "defaults::nbar")]
    pub nbar: [f64; 2],
    #[serde(default)]
    pub phase_target: PhaseTarget,
    #[serde(default = "defaults::max_iter_stage1")]
    pub max_iter_stage1: usize,
    #[serde(default = "defaults::max_iter_stage2")]
    pub max_iter_stage2: usize,
    /// Refine at most this many stage-1 candidates per level; all when absent.
    #[serde(default)]
    pub max_refine: Option<usize>,
}

mod defaults {
    pub fn n_groups() -> usize {
        18
    }
    pub fn z_max() -> u32 {
        5
    }
    pub fn n_max() -> u32 {
        30
    }
    pub fn n_max_start() -> u32 {
        1
    }
    pub fn min_separation() -> f64 {
        5e-9
    }
    pub fn ensemble_size() -> usize {
        2000
    }
    pub fn target_infidelity() -> f64 {
        1e-3
    }
    pub fn c1() -> f64 {
        10.0
    }
    pub fn c2_stage1() -> f64 {
        5.0
    }
    pub fn c2_stage2() -> f64 {
        1e9
    }
    pub fn smoothing() -> f64 {
        1e-3
    }
    pub fn nbar() -> [f64; 2] {
        [1.0, 1.0]
    }
    pub fn max_iter_stage1() -> usize {
        300
    }
    pub fn max_iter_stage2() -> usize {
        1000
    }
}

impl SearchConfig {
    pub fn new(trap: TrapSetup, gate_time: f64) -> Self {
        Self {
            trap,
            gate_time,
            n_groups: defaults::n_groups(),
            z_max: defaults::z_max(),
            n_max: defaults::n_max(),
            n_max_start: defaults::n_max_start(),
            min_separation: defaults::min_separation(),
            ensemble_size: defaults::ensemble_size(),
            target_infidelity: defaults::target_infidelity(),
            seed: 0,
            penalty_c1_stage1: defaults::c1(),
            penalty_c2_stage1: defaults::c2_stage1(),
            penalty_c1_stage2: defaults::c1(),
            penalty_c2_stage2: defaults::c2_stage2(),
            j1_form: J1Form::Additive,
            smoothing: defaults::smoothing(),
            nbar: defaults::nbar(),
            phase_target: PhaseTarget::Plus,
            max_iter_stage1: defaults::max_iter_stage1(),
            max_iter_stage2: defaults::max_iter_stage2(),
            max_refine: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.gate_time > 0.0 && self.gate_time.is_finite()) {
            return bad("gate_time must be positive");
        }
        if self.n_groups < 2 {
            return bad("n_groups must be at least 2");
        }
        if self.z_max < 1 {
            return bad("z_max must be at least 1");
        }
        if !(self.min_separation > 0.0) {
            return bad("min_separation must be positive");
        }
        if self.ensemble_size < 1 {
            return bad("ensemble_size must be at least 1");
        }
        if self.n_max_start < 1 || self.n_max_start > self.n_max {
            return bad("need 1 ≤ n_max_start ≤ n_max");
        }
        if !(self.smoothing > 0.0) {
            return bad("smoothing must be positive");
        }
        if self.nbar.iter().any(|&n| !(n >= 0.0)) {
            return bad("nbar must be nonnegative");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
