use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::noise::{ClampRule, NoiseKind, NoiseSpec, SweepPoint, SweepResult};
use crate::error::{usage, Error, Result};
use crate::gate_dynamics::{
    displacement_amplitudes, entangling_phase, infidelity_terms, wrap_phase, GateSolution,
    InfidelityTerms, PhaseTarget, PulseSequence,
};
use crate::ion_physics::NormalModes;

const MAX_REDRAWS: usize = 10_000;

/// Truncated-infidelity terms of `seq` against `modes`.
pub(crate) fn terms_for(
    seq: &PulseSequence,
    modes: &NormalModes,
    nbar: &[f64],
    target: PhaseTarget,
) -> Result<InfidelityTerms> {
    let d = displacement_amplitudes(seq, modes)?;
    let theta = wrap_phase(entangling_phase(seq, modes)?);
    infidelity_terms(theta, &d.plus, &d.minus, nbar, target)
}

/// Stream `realization` of the jitter RNG. Realization i sees the same normals at every σ_t.
fn realization_rng(seed: u64, realization: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization as u64);
    rng
}

fn forward_sweep(kicks: &mut [(f64, i32)], sep: f64) {
    kicks.sort_by(|a, b| a.0.total_cmp(&b.0));
    // A relative slack keeps gaps that already sit at the separation untouched.
    let floor = sep * (1.0 - 1e-9);
    for m in 1..kicks.len() {
        if kicks[m].0 - kicks[m - 1].0 < floor {
            kicks[m].0 = kicks[m - 1].0 + sep;
        }
    }
}

fn jittered(
    base: &PulseSequence,
    sigma_t: f64,
    spec: &NoiseSpec,
    realization: usize,
) -> Result<PulseSequence> {
    let mut rng = realization_rng(spec.seed, realization);
    let floor = spec.min_separation * (1.0 - 1e-9);
    for _ in 0..MAX_REDRAWS {
        let mut kicks: Vec<(f64, i32)> = base
            .times()
            .iter()
            .zip(base.directions())
            .map(|(&t, &z)| (t + sigma_t * rng.sample::<f64, _>(StandardNormal), z))
            .collect();
        match spec.clamp {
            ClampRule::ForwardSweep => {
                forward_sweep(&mut kicks, spec.min_separation);
                return PulseSequence::from_unsorted(kicks);
            }
            ClampRule::Reject => {
                kicks.sort_by(|a, b| a.0.total_cmp(&b.0));
                if kicks.windows(2).all(|w| w[1].0 - w[0].0 >= floor) {
                    return PulseSequence::from_unsorted(kicks);
                }
            }
        }
    }
    Err(Error::Convergence(format!(
        "no jitter realization honoured the {:e} s separation in {MAX_REDRAWS} draws",
        spec.min_separation
    )))
}

/// Monte-Carlo mean and spread of ε when every expanded pulse time gets i.i.d.
/// Gaussian noise of standard deviation `sigma_t`.
pub fn jitter_monte_carlo(
    sol: &GateSolution,
    sigma_t: f64,
    spec: &NoiseSpec,
) -> Result<SweepPoint> {
    spec.validate()?;
    if !(sigma_t >= 0.0) || !sigma_t.is_finite() {
        return Err(usage("sigma_t must be finite and nonnegative"));
    }
    sol.sequence.require_expanded()?;
    let modes = sol.modes()?;
    let samples: Vec<InfidelityTerms> = (0..spec.n_samples)
        .into_par_iter()
        .map(|i| {
            let seq = jittered(&sol.sequence, sigma_t, spec, i)?;
            terms_for(&seq, &modes, &sol.nbar, sol.target)
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    // Shifted by the first sample so identical realizations give their common value exactly.
    let shifted_mean = |f: &dyn Fn(&InfidelityTerms) -> f64| {
        let x0 = f(&samples[0]);
        x0 + samples.iter().map(|t| f(t) - x0).sum::<f64>() / n
    };
    let mean_phase = shifted_mean(&|t| t.phase);
    let mean_motional = shifted_mean(&|t| t.motional);
    let mean = shifted_mean(&|t| t.total());
    let var = samples
        .iter()
        .map(|t| (t.total() - mean).powi(2))
        .sum::<f64>()
        / n;
    let std = var.sqrt();
    Ok(SweepPoint {
        magnitude: sigma_t,
        mean_error: mean,
        std_error: std,
        standard_error: std / n.sqrt(),
        phase_term: mean_phase,
        motional_term: mean_motional,
        n_samples: spec.n_samples,
    })
}

/// [`jitter_monte_carlo`] over a grid of σ_t with common random numbers.
pub fn jitter_sweep(sol: &GateSolution, grid: &[f64], spec: &NoiseSpec) -> Result<SweepResult> {
    let points = grid
        .iter()
        .map(|&s| jitter_monte_carlo(sol, s, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_points(NoiseKind::TimingJitter, &points))
}
