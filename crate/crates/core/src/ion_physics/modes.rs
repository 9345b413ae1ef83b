use serde::{Deserialize, Serialize};

use super::{TrapSetup, HBAR};
use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Axial mode label. `Ip` is the lower-frequency in-phase mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ip,
    Op,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Ip, Mode::Op];

    pub fn index(self) -> usize {
        match self {
            Mode::Ip => 0,
            Mode::Op => 1,
        }
    }
}

/// Axial normal modes of a two-ion crystal.
///
/// Arrays are indexed `[mode][ion]` with mode 0 = ip, 1 = op and ion 0 = ion 1.
/// Eigenvectors are orthonormal in mass-weighted coordinates:
/// `b_ip = (b₁, b₂)` and `b_op = (b₂, −b₁)` with `b₁, b₂ > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalModes<T = f64> {
    pub omega: [T; 2],
    pub b: [[T; 2]; 2],
    pub eta: [[T; 2]; 2],
    pub eta_bar_plus: [T; 2],
    pub eta_bar_minus: [T; 2],
}

impl<T: Scalar> NormalModes<T> {
    /// Assemble from frequencies, eigenvectors and Lamb–Dicke factors, filling η̄±.
    pub fn from_parts(omega: [T; 2], b: [[T; 2]; 2], eta: [[T; 2]; 2]) -> Self {
        let half = T::of(0.5);
        let plus = |a: usize| half * (b[a][0] * eta[a][0] + b[a][1] * eta[a][1]);
        let minus = |a: usize| half * (b[a][1] * eta[a][1] - b[a][0] * eta[a][0]);
        Self {
            omega,
            b,
            eta,
            eta_bar_plus: [plus(0), plus(1)],
            eta_bar_minus: [minus(0), minus(1)],
        }
    }

    pub fn omega_ip(&self) -> T {
        self.omega[0]
    }

    pub fn omega_op(&self) -> T {
        self.omega[1]
    }

    pub fn b_ip(&self) -> [T; 2] {
        self.b[0]
    }

    pub fn b_op(&self) -> [T; 2] {
        self.b[1]
    }

    /// Δω = ω_op − ω_ip.
    pub fn splitting(&self) -> T {
        self.omega[1] - self.omega[0]
    }

    /// b⁽¹⁾b⁽²⁾η⁽¹⁾η⁽²⁾ for one mode: the weight of that mode in the entangling phase.
    pub fn phase_coupling(&self, mode: usize) -> T {
        self.b[mode][0] * self.b[mode][1] * self.eta[mode][0] * self.eta[mode][1]
    }

    /// √(|b⁽¹⁾b⁽²⁾|η⁽¹⁾η⁽²⁾) for one mode.
    pub fn effective_coupling(&self, mode: Mode) -> T {
        self.phase_coupling(mode.index()).abs().sqrt()
    }

    /// Same couplings with shifted mode frequencies (systematic drift model).
    pub fn with_omega(&self, omega: [T; 2]) -> Self {
        Self {
            omega,
            ..self.clone()
        }
    }

    pub fn cast<U: Scalar>(&self) -> NormalModes<U> {
        let c = |x: T| U::of(x.to_f64_lossy());
        let c2 = |a: [T; 2]| [c(a[0]), c(a[1])];
        NormalModes {
            omega: c2(self.omega),
            b: [c2(self.b[0]), c2(self.b[1])],
            eta: [c2(self.eta[0]), c2(self.eta[1])],
            eta_bar_plus: c2(self.eta_bar_plus),
            eta_bar_minus: c2(self.eta_bar_minus),
        }
    }
}

/// Trap frequency of `target_mass` in an RF pseudopotential that gives `ref_omega0` for `ref_mass`.
pub fn pseudopotential_frequency<T: Scalar>(
    ref_omega0: T,
    ref_mass: T,
    target_mass: T,
) -> Result<T> {
    if !(ref_omega0 > T::zero() && ref_mass > T::zero() && target_mass > T::zero()) {
        return Err(domain("pseudopotential inputs must be positive"));
    }
    Ok(ref_omega0 * (ref_mass / target_mass).sqrt())
}

/// Axial projection of the two-photon wavevector, 2·(2π/λ)·cos θ.
pub fn effective_wavevector<T: Scalar>(wavelength: T, tilt: T) -> Result<T> {
    if !(wavelength > T::zero()) {
        return Err(domain("wavelength must be positive"));
    }
    Ok(T::of(2.0) * T::TAU() / wavelength * tilt.cos())
}

/// η = k·√(ħ/(2mω)).
pub fn lamb_dicke<T: Scalar>(k_eff: T, mass: T, omega: T) -> Result<T> {
    if !(k_eff > T::zero() && mass > T::zero() && omega > T::zero()) {
        return Err(domain("Lamb-Dicke inputs must be positive"));
    }
    Ok(k_eff * (T::of(HBAR) / (T::of(2.0) * mass * omega)).sqrt())
}

/// Analytic axial modes of a two-ion crystal with mass ratio μ = m⁽²⁾/m⁽¹⁾.
pub fn normal_modes<T: Scalar>(setup: &TrapSetup) -> Result<NormalModes<T>> {
    setup.validate()?;
    let mu = T::of(setup.mass_ratio());
    if !(mu > T::zero()) {
        return Err(domain("mass ratio must be positive"));
    }
    let one = T::one();
    let two = T::of(2.0);
    let w0 = T::of(setup.omega0_ion1);
    let root = (one - mu + mu * mu).sqrt();
    let omega_ip = w0 * ((one + mu - root) / mu).sqrt();
    let omega_op = w0 * ((one + mu + root) / mu).sqrt();
    let b1_sq = (one - mu + root) / (two * root);
    let b1 = b1_sq.sqrt();
    let b2 = (one - b1_sq).sqrt();

    let tilt = T::of(setup.beam_tilt);
    let k = [
        effective_wavevector(T::of(setup.ion1.raman_wavelength), tilt)?,
        effective_wavevector(T::of(setup.ion2.raman_wavelength), tilt)?,
    ];
    let m = [T::of(setup.ion1.mass), T::of(setup.ion2.mass)];
    let omega = [omega_ip, omega_op];
    let mut eta = [[T::zero(); 2]; 2];
    for a in 0..2 {
        for j in 0..2 {
            eta[a][j] = lamb_dicke(k[j], m[j], omega[a])?;
        }
    }
    Ok(NormalModes::from_parts(omega, [[b1, b2], [b2, -b1]], eta))
}
