//! Ion species, two-ion crystal setup, and the axial normal-mode structure.

mod modes;
mod species;

pub use modes::{
    effective_wavevector, lamb_dicke, normal_modes, pseudopotential_frequency, Mode, NormalModes,
};
pub use species::{SpeciesSpec, SpeciesTable, TrapSetup, BUILTIN_PAIRS, SPECIES_TABLE_ENV};

/// Reduced Planck constant (J·s), exact since the 2019 SI redefinition.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unified atomic mass unit (kg), CODATA 2022.
pub const AMU: f64 = 1.660_539_068_92e-27;

/// Coulomb constant times elementary charge squared, e²/(4πε₀) (J·m).
pub const COULOMB_E2: f64 = 2.307_077_552e-28;
