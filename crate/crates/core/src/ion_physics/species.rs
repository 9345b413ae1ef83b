use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AMU;
use crate::error::{domain, Error, Result};

/// Environment variable naming an extra species table to merge over the built-ins.
pub const SPECIES_TABLE_ENV: &str = "FASTGATE_SPECIES_TABLE";

/// Ion pairs available out of the box, ion 1 first.
pub const BUILTIN_PAIRS: [&str; 4] = ["ba133-ba138", "ca43-sr88", "ca43-ca40", "yb171-be9"];

/// An ion species: mass in kg and the Raman transition wavelength in m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSpec {
    pub name: String,
    pub mass: f64,
    pub raman_wavelength: f64,
}

impl SpeciesSpec {
    pub fn new(name: impl Into<String>, mass: f64, raman_wavelength: f64) -> Result<Self> {
        if !(mass > 0.0) || !(raman_wavelength > 0.0) {
            return Err(domain("species mass and wavelength must be positive"));
        }
        Ok(Self {
            name: name.into(),
            mass,
            raman_wavelength,
        })
    }

    pub fn from_amu_nm(name: impl Into<String>, mass_amu: f64, wavelength_nm: f64) -> Result<Self> {
        Self::new(name, mass_amu * AMU, wavelength_nm * 1e-9)
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass / AMU
    }
}

#[derive(Deserialize)]
struct TableFile {
    species: Vec<TableRow>,
}

#[derive(Deserialize)]
struct TableRow {
    name: String,
    mass_amu: f64,
    wavelength_nm: f64,
}

/// Lookup table of species by lower-case name.
#[derive(Clone, Debug)]
pub struct SpeciesTable {
    entries: Vec<SpeciesSpec>,
}

// Neutral-atom isotope masses (AME2020) and the Raman wavelengths used for each ion.
const BUILTIN: [(&str, f64, f64); 7] = [
    ("ba133", 132.906_007_4, 532.0),
    ("ba138", 137.905_247_2, 532.0),
    ("ca43", 42.958_766_6, 393.0),
    ("ca40", 39.962_590_86, 393.0),
    ("sr88", 87.905_612_5, 408.0),
    ("yb171", 170.936_330_2, 369.5),
    ("be9", 9.012_183_1, 313.0),
];

impl Default for SpeciesTable {
    fn default() -> Self {
        Self::builtin()
    }
}

impl SpeciesTable {
    pub fn builtin() -> Self {
        let entries = BUILTIN
            .iter()
            .map(|&(n, m, l)| {
                SpeciesSpec::from_amu_nm(n, m, l).expect("built-in species are valid")
            })
            .collect();
        Self { entries }
    }

    /// Built-ins, overlaid with the table named by `FASTGATE_SPECIES_TABLE` when set.
    pub fn from_env() -> Result<Self> {
        let mut table = Self::builtin();
        if let Ok(path) = std::env::var(SPECIES_TABLE_ENV) {
            table.merge_file(path)?;
        }
        Ok(table)
    }

    /// Parse a TOML table of `[[species]]` rows with `name`, `mass_amu`, `wavelength_nm`.
    pub fn parse_toml(text: &str) -> Result<Vec<SpeciesSpec>> {
        let file: TableFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("species table: {e}")))?;
        file.species
            .into_iter()
            .map(|r| SpeciesSpec::from_amu_nm(r.name.to_lowercase(), r.mass_amu, r.wavelength_nm))
            .collect()
    }

    pub fn merge_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let text = std::fs::read_to_string(path.as_ref())?;
        for spec in Self::parse_toml(&text)? {
            self.insert(spec);
        }
        Ok(())
    }

    pub fn insert(&mut self, spec: SpeciesSpec) {
        match self.entries.iter_mut().find(|e| e.name == spec.name) {
            Some(slot) => *slot = spec,
            None => self.entries.push(spec),
        }
    }

    pub fn get(&self, name: &str) -> Result<&SpeciesSpec> {
        let key = name.to_lowercase();
        self.entries
            .iter()
            .find(|e| e.name == key)
            .ok_or_else(|| Error::UnknownSpecies(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    /// Resolve a pair name such as `ca43-sr88` into (ion 1, ion 2).
    pub fn pair(&self, pair: &str) -> Result<(SpeciesSpec, SpeciesSpec)> {
        let (a, b) = pair
            .split_once('-')
            .ok_or_else(|| Error::UnknownSpecies(pair.to_string()))?;
        Ok((self.get(a)?.clone(), self.get(b)?.clone()))
    }
}

/// A two-ion crystal. Ion 1 is the species whose axial trap frequency is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapSetup {
    pub ion1: SpeciesSpec,
    pub ion2: SpeciesSpec,
    /// Axial angular trap frequency experienced by ion 1 alone (rad/s).
    pub omega0_ion1: f64,
    /// Raman beam angle from the trap axis (rad).
    #[serde(default = "default_tilt")]
    pub beam_tilt: f64,
}

fn default_tilt() -> f64 {
    FRAC_PI_4
}

impl TrapSetup {
    pub fn new(ion1: SpeciesSpec, ion2: SpeciesSpec, omega0_ion1: f64) -> Result<Self> {
        Self::with_tilt(ion1, ion2, omega0_ion1, FRAC_PI_4)
    }

    pub fn with_tilt(
        ion1: SpeciesSpec,
        ion2: SpeciesSpec,
        omega0_ion1: f64,
        beam_tilt: f64,
    ) -> Result<Self> {
        let setup = Self {
            ion1,
            ion2,
            omega0_ion1,
            beam_tilt,
        };
        setup.validate()?;
        Ok(setup)
    }

    /// Built-in pair at ω₀ = 2π·1 MHz and θ = π/4.
    pub fn builtin_pair(pair: &str) -> Result<Self> {
        let (a, b) = SpeciesTable::builtin().pair(pair)?;
        Self::new(a, b, 2.0 * std::f64::consts::PI * 1e6)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0_ion1 > 0.0) {
            return Err(domain("trap frequency must be positive"));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.beam_tilt) {
            return Err(domain("beam tilt must lie in [0, π/2)"));
        }
        if !(self.ion1.mass > 0.0 && self.ion2.mass > 0.0) {
            return Err(domain("ion masses must be positive"));
        }
        Ok(())
    }

    /// μ = m⁽²⁾/m⁽¹⁾.
    pub fn mass_ratio(&self) -> f64 {
        self.ion2.mass / self.ion1.mass
    }

    pub fn pair_name(&self) -> String {
        format!("{}-{}", self.ion1.name, self.ion2.name)
    }
}
