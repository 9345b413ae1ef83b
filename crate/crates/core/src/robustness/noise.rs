use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    TimingJitter,
    OpDrift,
    CommonDrift,
    ReprateDrift,
}

/// How jittered pulses are brought back to the minimum separation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampRule {
    /// Sort, then push each pulse to at least `min_separation` after its predecessor.
    #[default]
    ForwardSweep,
    /// Redraw the whole realization until every gap honours the separation.
    Reject,
}

/// Parameters of one noise model.
///
/// `magnitude` is in seconds for jitter, rad/s (or a fraction) for mode drift and
/// a fraction for rep-rate drift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub magnitude: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_separation")]
    pub min_separation: f64,
    #[serde(default)]
    pub clamp: ClampRule,
}

fn default_samples() -> usize {
    10_000
}

fn default_separation() -> f64 {
    5e-9
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, magnitude: f64) -> Self {
        Self {
            kind,
            magnitude,
            n_samples: default_samples(),
            seed: 0,
            min_separation: default_separation(),
            clamp: ClampRule::default(),
        }
    }

    pub fn jitter(sigma_t: f64, n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            ..Self::new(NoiseKind::TimingJitter, sigma_t)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude >= 0.0) || !self.magnitude.is_finite() {
            return Err(usage("noise magnitude must be finite and nonnegative"));
        }
        if self.n_samples == 0 {
            return Err(usage("n_samples must be at least 1"));
        }
        if !(self.min_separation >= 0.0) {
            return Err(usage("min_separation must be nonnegative"));
        }
        Ok(())
    }
}

/// Error statistics at one magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub magnitude: f64,
    pub mean_error: f64,
    /// Ensemble standard deviation.
    pub std_error: f64,
    /// std/√n; zero for deterministic sweeps.
    pub standard_error: f64,
    /// Mean of the (2/3)ΔΦ² term.
    pub phase_term: f64,
    /// Mean of the motional term.
    pub motional_term: f64,
    pub n_samples: usize,
}

impl SweepPoint {
    pub(crate) fn deterministic(magnitude: f64, phase: f64, motional: f64) -> Self {
        Self {
            magnitude,
            mean_error: phase + motional,
            std_error: 0.0,
            standard_error: 0.0,
            phase_term: phase,
            motional_term: motional,
            n_samples: 1,
        }
    }
}

/// Error curve over a magnitude grid, one entry per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: NoiseKind,
    pub grid: Vec<f64>,
    pub mean_error: Vec<f64>,
    pub std_error: Vec<f64>,
    pub standard_error: Vec<f64>,
    pub phase_contribution: Vec<f64>,
    pub motional_contribution: Vec<f64>,
    pub n_samples: usize,
}

impl SweepResult {
    pub fn from_points(kind: NoiseKind, points: &[SweepPoint]) -> Self {
        let col = |f: fn(&SweepPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
        Self {
            kind,
            grid: col(|p| p.magnitude),
            mean_error: col(|p| p.mean_error),
            std_error: col(|p| p.std_error),
            standard_error: col(|p| p.standard_error),
            phase_contribution: col(|p| p.phase_term),
            motional_contribution: col(|p| p.motional_term),
            n_samples: points.first().map_or(0, |p| p.n_samples),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn point(&self, i: usize) -> SweepPoint {
        SweepPoint {
            magnitude: self.grid[i],
            mean_error: self.mean_error[i],
            std_error: self.std_error[i],
            standard_error: self.standard_error[i],
            phase_term: self.phase_contribution[i],
            motional_term: self.motional_contribution[i],
            n_samples: self.n_samples,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = SweepPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Least-squares slope of log(y) against log(x); points with nonpositive values are skipped.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
