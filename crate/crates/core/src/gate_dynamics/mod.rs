//! Displacement amplitudes, entangling phase and fidelity functionals of an SDK sequence.

mod fidelity;
mod kinematics;
mod sequence;
mod solution;

pub use fidelity::{
    fidelity_exact_state_averaged, fidelity_state_dependent, infidelity_terms,
    infidelity_truncated, infidelity_truncated_with, phase_error, wrap_phase, InfidelityTerms,
    PhaseTarget,
};
pub use kinematics::{
    branch_phases, displacement_amplitudes, entangling_phase, mode_sums,
    motional_restoration_residual, Displacements,
};
pub use sequence::PulseSequence;
pub use solution::{GateSolution, GroupRecord, SearchMeta, SolutionStatus, SOLUTION_SCHEMA};

/// Above this many kicks the phase and restoration sums switch to compensated summation.
pub const COMPENSATED_SUM_THRESHOLD: usize = 1000;
