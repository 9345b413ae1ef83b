use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::kinematics::check_same_len;
use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Which maximally entangling phase counts as the goal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseTarget {
    /// Θ = +π/4.
    #[default]
    Plus,
    /// Θ = −π/4.
    Minus,
    /// Either sign; ΔΦ = |Θ| − π/4.
    Either,
}

/// Wrap an angle into (−π, π].
pub fn wrap_phase<T: Scalar>(theta: T) -> T {
    let tau = T::PI() + T::PI();
    let mut r = theta - tau * (theta / tau).round();
    if r <= -T::PI() {
        r = r + tau;
    } else if r > T::PI() {
        r = r - tau;
    }
    r
}

/// ΔΦ of a phase relative to the chosen target, after wrapping into (−π, π].
pub fn phase_error<T: Scalar>(theta: T, target: PhaseTarget) -> T {
    let w = wrap_phase(theta);
    let q = T::FRAC_PI_4();
    match target {
        PhaseTarget::Plus => w - q,
        PhaseTarget::Minus => w + q,
        PhaseTarget::Either => w.abs() - q,
    }
}

/// The two additive pieces of the truncated state-averaged infidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfidelityTerms<T = f64> {
    /// (2/3)·ΔΦ².
    pub phase: T,
    /// (2/3)·Σ_α (n̄_α + ½)(|β_α⁺|² + |β_α⁻|²).
    pub motional: T,
}

impl<T: Scalar> InfidelityTerms<T> {
    pub fn total(&self) -> T {
        self.phase + self.motional
    }
}

fn check_nbar<T: Scalar>(nbar: &[T]) -> Result<()> {
    if nbar.iter().all(|&n| n >= T::zero()) {
        Ok(())
    } else {
        Err(domain("thermal occupancy must be nonnegative"))
    }
}

pub fn infidelity_terms<T: Scalar>(
    theta: T,
    beta_plus: &[Complex<T>],
    beta_minus: &[Complex<T>],
    nbar: &[T],
    target: PhaseTarget,
) -> Result<InfidelityTerms<T>> {
    check_same_len(beta_plus, beta_minus, "beta_plus/beta_minus")?;
    check_same_len(beta_plus, nbar, "beta/nbar")?;
    check_nbar(nbar)?;
    let two_thirds = T::of(2.0 / 3.0);
    let half = T::of(0.5);
    let dphi = phase_error(theta, target);
    let motional = beta_plus
        .iter()
        .zip(beta_minus)
        .zip(nbar)
        .fold(T::zero(), |acc, ((p, m), &n)| {
            acc + (n + half) * (p.norm_sqr() + m.norm_sqr())
        });
    Ok(InfidelityTerms {
        phase: two_thirds * dphi * dphi,
        motional: two_thirds * motional,
    })
}

/// ε_av = (2/3)[ΔΦ² + Σ_α (n̄_α + ½)(|β_α⁺|² + |β_α⁻|²)], ΔΦ = |Θ| − π/4.
pub fn infidelity_truncated<T: Scalar>(
    theta: T,
    beta_plus: &[Complex<T>],
    beta_minus: &[Complex<T>],
    nbar: &[T],
) -> Result<T> {
    infidelity_truncated_with(theta, beta_plus, beta_minus, nbar, PhaseTarget::Either)
}

pub fn infidelity_truncated_with<T: Scalar>(
    theta: T,
    beta_plus: &[Complex<T>],
    beta_minus: &[Complex<T>],
    nbar: &[T],
    target: PhaseTarget,
) -> Result<T> {
    infidelity_terms(theta, beta_plus, beta_minus, nbar, target).map(|t| t.total())
}

/// exp(−Σ_α (n̄_α + ½)|x_α|²), the thermal average of a displacement overlap.
fn thermal_overlap<T: Scalar>(x: impl Iterator<Item = Complex<T>>, nbar: &[T]) -> T {
    let half = T::of(0.5);
    (-x.zip(nbar)
        .fold(T::zero(), |acc, (v, &n)| acc + (n + half) * v.norm_sqr()))
    .exp()
}

/// Exact state-averaged fidelity from branch phases and per-ion branch amplitudes.
///
/// `beta1`, `beta2` are per-mode amplitudes in the 4i·b·η·Σ z e^{iωt} convention
/// (see [`super::Displacements::branch_per_ion`]).
pub fn fidelity_exact_state_averaged<T: Scalar>(
    theta_uu: T,
    theta_du: T,
    beta1: &[Complex<T>],
    beta2: &[Complex<T>],
    nbar: &[T],
) -> Result<T> {
    check_same_len(beta1, beta2, "beta1/beta2")?;
    check_same_len(beta1, nbar, "beta/nbar")?;
    check_nbar(nbar)?;
    let dphi = phase_error((theta_uu - theta_du) * T::of(0.5), PhaseTarget::Either);
    let e1 = thermal_overlap(beta1.iter().copied(), nbar);
    let e2 = thermal_overlap(beta2.iter().copied(), nbar);
    let ed = thermal_overlap(beta1.iter().zip(beta2).map(|(a, b)| a - b), nbar);
    let es = thermal_overlap(beta1.iter().zip(beta2).map(|(a, b)| a + b), nbar);
    Ok(T::of(0.5) + (dphi + dphi).cos() / T::of(6.0) * (e1 + e2) + (ed + es) / T::of(12.0))
}

/// Fidelity for a real input state with populations `probs` in the order (↑↑, ↑↓, ↓↑, ↓↓).
///
/// Branch amplitudes are a↑↑ = (β⁽¹⁾+β⁽²⁾)/2 = −a↓↓ and a↑↓ = (β⁽¹⁾−β⁽²⁾)/2 = −a↓↑. Each
/// pair of branches contributes P_s P_s' cos(δ_ss' + Im Σ a_s* a_s') e^{−Σ(n̄+½)|a_s'−a_s|²},
/// with δ = 2ΔΦ between the aligned and anti-aligned groups.
pub fn fidelity_state_dependent<T: Scalar>(
    probs: [T; 4],
    theta_uu: T,
    theta_du: T,
    beta1: &[Complex<T>],
    beta2: &[Complex<T>],
    nbar: &[T],
) -> Result<T> {
    check_same_len(beta1, beta2, "beta1/beta2")?;
    check_same_len(beta1, nbar, "beta/nbar")?;
    check_nbar(nbar)?;
    let tol = T::of(1e-12).max(T::of(64.0) * T::epsilon());
    if probs.iter().any(|&p| p < -tol) {
        return Err(domain("populations must be nonnegative"));
    }
    let total = probs.iter().fold(T::zero(), |a, &p| a + p);
    if (total - T::one()).abs() > tol {
        return Err(domain("populations must sum to 1"));
    }
    let half = T::of(0.5);
    let uu: Vec<Complex<T>> = beta1
        .iter()
        .zip(beta2)
        .map(|(a, b)| (a + b) * half)
        .collect();
    let ud: Vec<Complex<T>> = beta1
        .iter()
        .zip(beta2)
        .map(|(a, b)| (a - b) * half)
        .collect();
    let neg = |v: &[Complex<T>]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let amps = [uu.clone(), ud.clone(), neg(&ud), neg(&uu)];
    let dphi = phase_error((theta_uu - theta_du) * half, PhaseTarget::Either);
    let psi = [T::zero(), -(dphi + dphi), -(dphi + dphi), T::zero()];

    let mut f = probs.iter().fold(T::zero(), |a, &p| a + p * p);
    for s in 0..4 {
        for r in (s + 1)..4 {
            let cross = amps[s]
                .iter()
                .zip(&amps[r])
                .fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).im);
            let overlap = thermal_overlap(amps[s].iter().zip(&amps[r]).map(|(a, b)| b - a), nbar);
            f = f + T::of(2.0) * probs[s] * probs[r] * (psi[r] - psi[s] + cross).cos() * overlap;
        }
    }
    Ok(f)
}
