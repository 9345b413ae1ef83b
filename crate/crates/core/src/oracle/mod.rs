//! Independent reference calculations used to validate the analytic gate formulas.
//!
//! Nothing here shares code with `gate_dynamics` beyond the [`NormalModes`] input type.
//!
//! [`NormalModes`]: crate::ion_physics::NormalModes

mod branches;
mod modes;
mod sphere;
mod thermal;

pub use branches::{propagate_branches, Branch, BranchState};
pub use modes::{brute_force_modes, jacobi_eigen, ModeStructure};
pub use sphere::{average_over_3sphere, gauss_legendre, QuadratureEstimate};
pub use thermal::{
    default_fock_cutoff, thermal_displacement_expectation, thermal_displacement_expectation_auto,
};
