use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{
    branch_phases, displacement_amplitudes, entangling_phase, infidelity_terms,
    motional_restoration_residual, phase_error, wrap_phase, PhaseTarget, PulseSequence,
};
use crate::error::{usage, Result};
use crate::ion_physics::{normal_modes, NormalModes, TrapSetup};

pub const SOLUTION_SCHEMA: &str = "fastgate.solution/1";

/// Outcome classification of a searched or evaluated sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionStatus {
    /// ε ≤ target, per-mode residual ≤ 1e−4, |ΔΦ| ≤ 1e−2·π/4 and all gaps honour the bandwidth.
    Converged,
    /// ε ≤ target but a stricter convergence condition fails.
    TargetMet,
    /// Best candidate found; ε above target.
    BestEffort,
    /// Plain evaluation of a user-supplied sequence.
    Evaluated,
}

impl SolutionStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SolutionStatus::Converged | SolutionStatus::TargetMet)
    }
}

/// One SDK group of the expanded sequence: centre time and signed kick count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub center: f64,
    pub amplitude: i32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchMeta {
    pub seed: u64,
    pub n_max: u32,
    pub ensemble_size: usize,
    pub n_groups: usize,
    /// Stage-1 integer group amplitudes on the uniform grid.
    pub stage1_groups: Vec<i32>,
    pub stage1_cost: f64,
    /// Stage-2 cost of the expanded stage-1 candidate and of the returned timings.
    pub stage2_initial_cost: f64,
    pub stage2_final_cost: f64,
    pub cost_history: Vec<f64>,
    pub stage2_converged: bool,
    /// True when some neighbouring pulses sit at the minimum separation.
    pub bandwidth_active: bool,
    pub candidates_refined: usize,
}

/// An expanded SDK sequence together with its evaluated gate figures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSolution {
    pub schema: String,
    pub tool_version: String,
    pub trap: TrapSetup,
    pub sequence: PulseSequence,
    /// Entangling phase Θ wrapped into (−π, π].
    pub theta: f64,
    pub beta_plus: Vec<Complex<f64>>,
    pub beta_minus: Vec<Complex<f64>>,
    pub infidelity: f64,
    pub phase_term: f64,
    pub motional_term: f64,
    pub nbar: Vec<f64>,
    pub target: PhaseTarget,
    pub status: SolutionStatus,
    /// Realized span between first and last SDK (s).
    pub gate_time: f64,
    pub n_sdks: u32,
    #[serde(default)]
    pub groups: Vec<GroupRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_meta: Option<SearchMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

impl GateSolution {
    pub fn evaluate(
        trap: &TrapSetup,
        sequence: PulseSequence,
        nbar: Vec<f64>,
        target: PhaseTarget,
    ) -> Result<Self> {
        let modes = normal_modes(trap)?;
        Self::evaluate_with_modes(trap, &modes, sequence, nbar, target)
    }

    /// Evaluate against explicit (possibly perturbed) modes instead of those of `trap`.
    pub fn evaluate_with_modes(
        trap: &TrapSetup,
        modes: &NormalModes,
        sequence: PulseSequence,
        nbar: Vec<f64>,
        target: PhaseTarget,
    ) -> Result<Self> {
        if nbar.len() != 2 {
            return Err(usage("nbar must list one occupancy per mode"));
        }
        let d = displacement_amplitudes(&sequence, modes)?;
        let theta = wrap_phase(entangling_phase(&sequence, modes)?);
        let terms = infidelity_terms(theta, &d.plus, &d.minus, &nbar, target)?;
        Ok(Self {
            schema: SOLUTION_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            trap: trap.clone(),
            gate_time: sequence.span(),
            n_sdks: sequence.n_sdks(),
            sequence,
            theta,
            beta_plus: d.plus.to_vec(),
            beta_minus: d.minus.to_vec(),
            infidelity: terms.total(),
            phase_term: terms.phase,
            motional_term: terms.motional,
            nbar,
            target,
            status: SolutionStatus::Evaluated,
            groups: Vec::new(),
            search_meta: None,
            manifest: None,
        })
    }

    /// Recompute all figures from the stored trap and sequence.
    pub fn reevaluate(&self) -> Result<Self> {
        let mut fresh = Self::evaluate(
            &self.trap,
            self.sequence.clone(),
            self.nbar.clone(),
            self.target,
        )?;
        fresh.status = self.status;
        fresh.groups = self.groups.clone();
        fresh.search_meta = self.search_meta.clone();
        fresh.manifest = self.manifest.clone();
        Ok(fresh)
    }

    /// Recompute ε from the stored Θ, β± and n̄ alone.
    pub fn stored_infidelity(&self) -> Result<f64> {
        infidelity_terms(
            self.theta,
            &self.beta_plus,
            &self.beta_minus,
            &self.nbar,
            self.target,
        )
        .map(|t| t.total())
    }

    pub fn modes(&self) -> Result<NormalModes> {
        normal_modes(&self.trap)
    }

    pub fn restoration_residual(&self) -> Result<[f64; 2]> {
        Ok(motional_restoration_residual(
            &self.sequence,
            &self.modes()?,
        ))
    }

    pub fn branch_phases(&self) -> Result<(f64, f64)> {
        branch_phases(&self.sequence, &self.modes()?)
    }

    pub fn phase_error(&self) -> f64 {
        phase_error(self.theta, self.target)
    }

    /// Status implied by the stored figures against `target_infidelity` and `min_separation`.
    pub fn classify(&self, target_infidelity: f64, min_separation: f64) -> Result<SolutionStatus> {
        if !(self.infidelity <= target_infidelity) {
            return Ok(SolutionStatus::BestEffort);
        }
        let residual = self.restoration_residual()?;
        let gaps_ok = self
            .sequence
            .min_gap()
            .map_or(true, |g| g >= min_separation - 1e-15);
        let strict = residual.iter().all(|&r| r <= 1e-4)
            && self.phase_error().abs() <= 1e-2 * std::f64::consts::FRAC_PI_4
            && gaps_ok;
        Ok(if strict {
            SolutionStatus::Converged
        } else {
            SolutionStatus::TargetMet
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sol: Self = serde_json::from_str(text)?;
        if sol.schema != SOLUTION_SCHEMA {
            return Err(usage(format!(
                "unsupported solution schema `{}`",
                sol.schema
            )));
        }
        sol.trap.validate()?;
        PulseSequence::new(
            sol.sequence.times().to_vec(),
            sol.sequence.directions().to_vec(),
        )?;
        Ok(sol)
    }
}
