use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gate_dynamics::GateSolution;
use crate::ion_physics::{normal_modes, Mode};

/// Universal frontier coordinates of a solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPoint {
    /// η̄_eff·𝒩 with η̄_eff = √|b⁽¹⁾b⁽²⁾η⁽¹⁾η⁽²⁾| of the chosen mode.
    pub scaled_sdks: f64,
    /// Δω·τ_G/2π.
    pub scaled_time: f64,
}

pub fn universal_rescale(solutions: &[GateSolution], mode: Mode) -> Result<Vec<RescaledPoint>> {
    solutions
        .iter()
        .map(|s| {
            let modes = normal_modes::<f64>(&s.trap)?;
            Ok(RescaledPoint {
                scaled_sdks: modes.effective_coupling(mode) * s.n_sdks as f64,
                scaled_time: modes.splitting() * s.gate_time / std::f64::consts::TAU,
            })
        })
        .collect()
}
