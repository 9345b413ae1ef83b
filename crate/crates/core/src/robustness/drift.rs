use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jitter::terms_for;
use super::noise::{NoiseKind, SweepPoint, SweepResult};
use crate::error::{usage, Result};
use crate::gate_dynamics::{GateSolution, GroupRecord, PulseSequence};

/// Which mode frequencies a systematic drift moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftAxis {
    /// ω_op → ω_op + δ, ω_ip fixed.
    OpOnly,
    /// Both modes move together.
    Common,
}

/// Whether a drift grid holds absolute shifts (rad/s) or fractions of each mode frequency.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftScale {
    #[default]
    Absolute,
    Fractional,
}

/// ε of the unchanged sequence under shifted mode frequencies. Eigenvectors and
/// Lamb–Dicke factors stay at their nominal values.
pub fn frequency_drift_sweep(
    sol: &GateSolution,
    which: DriftAxis,
    scale: DriftScale,
    delta_grid: &[f64],
) -> Result<SweepResult> {
    let modes = sol.modes()?;
    let nominal = modes.omega;
    let points = delta_grid
        .par_iter()
        .map(|&d| {
            if !d.is_finite() {
                return Err(usage("drift values must be finite"));
            }
            let shift = |w: f64| match scale {
                DriftScale::Absolute => w + d,
                DriftScale::Fractional => w * (1.0 + d),
            };
            let omega = match which {
                DriftAxis::OpOnly => [nominal[0], shift(nominal[1])],
                DriftAxis::Common => [shift(nominal[0]), shift(nominal[1])],
            };
            if omega.iter().any(|&w| !(w > 0.0)) {
                return Err(usage("drift drives a mode frequency to zero or below"));
            }
            let t = terms_for(
                &sol.sequence,
                &modes.with_omega(omega),
                &sol.nbar,
                sol.target,
            )?;
            Ok(SweepPoint::deterministic(d, t.phase, t.motional))
        })
        .collect::<Result<Vec<_>>>()?;
    let kind = match which {
        DriftAxis::OpOnly => NoiseKind::OpDrift,
        DriftAxis::Common => NoiseKind::CommonDrift,
    };
    Ok(SweepResult::from_points(kind, &points))
}

/// Split an expanded sequence into groups: runs of same-sign kicks spaced by at most
/// `min_separation`.
pub fn infer_groups(seq: &PulseSequence, min_separation: f64) -> Vec<GroupRecord> {
    let t = seq.times();
    let z = seq.directions();
    let mut out = Vec::new();
    let mut start = 0;
    for m in 1..=t.len() {
        let split =
            m == t.len() || z[m] != z[m - 1] || t[m] - t[m - 1] > min_separation * (1.0 + 1e-6);
        if split {
            let centre = 0.5 * (t[start] + t[m - 1]);
            out.push(GroupRecord {
                center: centre,
                amplitude: z[start] * (m - start) as i32,
            });
            start = m;
        }
    }
    out
}

/// Pair each group with its pulses, in time order. Errors if the records do not describe
/// the sequence.
fn assign(seq: &PulseSequence, groups: &[GroupRecord]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| groups[a].center.total_cmp(&groups[b].center));
    let mut owner = Vec::with_capacity(seq.len());
    for &g in &order {
        owner.extend(std::iter::repeat_n(
            g,
            groups[g].amplitude.unsigned_abs() as usize,
        ));
    }
    if owner.len() != seq.len() {
        return Err(usage("group records do not account for every pulse"));
    }
    if owner
        .iter()
        .zip(seq.directions())
        .any(|(&g, &z)| groups[g].amplitude.signum() != z)
    {
        return Err(usage("group records disagree with pulse directions"));
    }
    Ok(owner)
}

/// Pulse times after scaling every intra-group offset by (1 + drift) about the group centre.
pub fn reprate_drifted(
    seq: &PulseSequence,
    groups: &[GroupRecord],
    drift: f64,
) -> Result<PulseSequence> {
    let owner = assign(seq, groups)?;
    let kicks = seq
        .times()
        .iter()
        .zip(seq.directions())
        .zip(&owner)
        .map(|((&t, &z), &g)| {
            let c = groups[g].center;
            (c + (1.0 + drift) * (t - c), z)
        })
        .collect();
    PulseSequence::from_unsorted(kicks)
}

/// ε under a fractional repetition-rate drift. Group centres stay fixed; solutions
/// without stored groups are split with [`infer_groups`].
pub fn reprate_drift_sweep(
    sol: &GateSolution,
    min_separation: f64,
    drift_grid: &[f64],
) -> Result<SweepResult> {
    sol.sequence.require_expanded()?;
    let groups = if sol.groups.is_empty() {
        infer_groups(&sol.sequence, min_separation)
    } else {
        sol.groups.clone()
    };
    let modes = sol.modes()?;
    let points = drift_grid
        .par_iter()
        .map(|&d| {
            if !(d > -1.0) || !d.is_finite() {
                return Err(usage("rep-rate drift must be finite and above -1"));
            }
            let seq = reprate_drifted(&sol.sequence, &groups, d)?;
            let t = terms_for(&seq, &modes, &sol.nbar, sol.target)?;
            Ok(SweepPoint::deterministic(d, t.phase, t.motional))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_points(NoiseKind::ReprateDrift, &points))
}
