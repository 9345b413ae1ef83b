use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::scalar::Scalar;

/// SDK arrival times (s) and signed kick directions.
///
/// In expanded form every direction is ±1; the stage-1 group form allows larger integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence<T = f64> {
    times: Vec<T>,
    directions: Vec<i32>,
}

impl<T: Scalar> PulseSequence<T> {
    pub fn new(times: Vec<T>, directions: Vec<i32>) -> Result<Self> {
        if times.len() != directions.len() {
            return Err(usage(format!(
                "{} times but {} directions",
                times.len(),
                directions.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(usage("pulse times must be finite"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(usage("pulse times must be nondecreasing"));
        }
        Ok(Self { times, directions })
    }

    /// Build from unordered (time, direction) pairs; sorts stably by time.
    pub fn from_unsorted(mut kicks: Vec<(T, i32)>) -> Result<Self> {
        kicks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let (times, directions) = kicks.into_iter().unzip();
        Self::new(times, directions)
    }

    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            directions: Vec::new(),
        }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn directions(&self) -> &[i32] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_expanded(&self) -> bool {
        self.directions.iter().all(|&z| z == 1 || z == -1)
    }

    pub(crate) fn require_expanded(&self) -> Result<()> {
        if self.is_expanded() {
            Ok(())
        } else {
            Err(usage("sequence must be expanded to unit kicks (z = ±1)"))
        }
    }

    /// Total SDK count Σ|z|.
    pub fn n_sdks(&self) -> u32 {
        self.directions.iter().map(|z| z.unsigned_abs()).sum()
    }

    /// Span between the first and last kick.
    pub fn span(&self) -> T {
        match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    /// Smallest spacing between consecutive kicks, `None` for fewer than two.
    pub fn min_gap(&self) -> Option<T> {
        self.times.windows(2).map(|w| w[1] - w[0]).reduce(T::min)
    }

    pub fn shifted(&self, dt: T) -> Self {
        Self {
            times: self.times.iter().map(|&t| t + dt).collect(),
            directions: self.directions.clone(),
        }
    }

    pub fn flipped(&self) -> Self {
        Self {
            times: self.times.clone(),
            directions: self.directions.iter().map(|z| -z).collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> PulseSequence<U> {
        PulseSequence {
            times: self.times.iter().map(|t| U::of(t.to_f64_lossy())).collect(),
            directions: self.directions.clone(),
        }
    }
}
