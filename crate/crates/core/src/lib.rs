//! Fast two-qubit gates for mixed-species trapped-ion crystals built from spin-dependent kicks.
//!
//! The analytic core is generic over [`scalar::Scalar`] (`f32` or `f64`); search,
//! oracles and robustness analysis run in `f64`.

pub mod cli;
pub mod error;
pub mod gate_dynamics;
pub mod ion_physics;
pub mod optimizer;
pub mod oracle;
pub mod robustness;
pub mod scalar;

pub use error::{Error, Result};
pub use gate_dynamics::{GateSolution, PhaseTarget, PulseSequence, SolutionStatus};
pub use ion_physics::{normal_modes, Mode, NormalModes, SpeciesSpec, SpeciesTable, TrapSetup};
pub use optimizer::{search, SearchConfig};
pub use scalar::Scalar;

pub type Modes32 = NormalModes<f32>;
pub type Modes64 = NormalModes<f64>;
pub type Sequence32 = PulseSequence<f32>;
pub type Sequence64 = PulseSequence<f64>;
pub type Displacements32 = gate_dynamics::Displacements<f32>;
pub type Displacements64 = gate_dynamics::Displacements<f64>;
