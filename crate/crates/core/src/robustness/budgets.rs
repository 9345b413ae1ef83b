use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Heating-induced error ε = rate·τ_G (rate in phonons/s).
pub fn heating_error(rate: f64, gate_time: f64) -> Result<f64> {
    if !(rate >= 0.0) || !(gate_time >= 0.0) {
        return Err(domain("heating rate and gate time must be nonnegative"));
    }
    Ok(rate * gate_time)
}

/// Lower bound on the gate fidelity from imperfect kicks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub fidelity: f64,
    /// Set when 𝒩ε_π ≥ 1 and the bound degenerates to 0.
    pub trivial: bool,
}

/// F ≥ (1 − 𝒩ε_π)².
pub fn sdk_error_bound(n_sdks: u32, eps_pi: f64) -> Result<FidelityBound> {
    if !(0.0..=1.0).contains(&eps_pi) {
        return Err(domain("per-SDK error must lie in [0, 1]"));
    }
    let x = n_sdks as f64 * eps_pi;
    if x >= 1.0 {
        return Ok(FidelityBound {
            fidelity: 0.0,
            trivial: true,
        });
    }
    Ok(FidelityBound {
        fidelity: (1.0 - x) * (1.0 - x),
        trivial: false,
    })
}

/// ε = 1 − exp(−t_op/T₂).
pub fn dephasing_error(coherence_time: f64, op_time: f64) -> Result<f64> {
    if !(coherence_time > 0.0) {
        return Err(domain("coherence time must be positive"));
    }
    if !(op_time >= 0.0) {
        return Err(domain("operation time must be nonnegative"));
    }
    Ok(-(-op_time / coherence_time).exp_m1())
}

/// Finite-pulse-duration error estimate (𝒩·ω₀·τ_SDK)².
pub fn finite_duration_budget(n_sdks: u32, omega0: f64, tau_sdk: f64) -> Result<f64> {
    if !(omega0 >= 0.0) || !(tau_sdk >= 0.0) {
        return Err(domain(
            "trap frequency and SDK duration must be nonnegative",
        ));
    }
    let x = n_sdks as f64 * omega0 * tau_sdk;
    Ok(x * x)
}
