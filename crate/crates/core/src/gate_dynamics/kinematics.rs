use num_complex::Complex;

use super::{PulseSequence, COMPENSATED_SUM_THRESHOLD};
use crate::error::{usage, Result};
use crate::ion_physics::NormalModes;
use crate::scalar::{CompensatedSum, Scalar};

/// Final residual displacements of both modes.
///
/// `per_ion[mode][ion]` is β_α⁽ʲ⁾ = 2i·η_α⁽ʲ⁾b_α⁽ʲ⁾·Σ z_m e^{iω_α t_m};
/// `plus`/`minus` are β_α± = β_α⁽²⁾ ± β_α⁽¹⁾, which coincide with the
/// same-spin and opposite-spin branch amplitudes 4i·η̄_α±·Σ z_m e^{iω_α t_m}.
#[derive(Clone, Debug, PartialEq)]
pub struct Displacements<T = f64> {
    pub per_ion: [[Complex<T>; 2]; 2],
    pub plus: [Complex<T>; 2],
    pub minus: [Complex<T>; 2],
}

impl<T: Scalar> Displacements<T> {
    /// Per-ion amplitudes in the branch-propagation convention, 4i·b⁽ʲ⁾η⁽ʲ⁾·Σ z e^{iωt}.
    ///
    /// These are the β⁽ʲ⁾ entering the exact state-averaged fidelity; they are twice
    /// the `per_ion` values.
    pub fn branch_per_ion(&self) -> [Vec<Complex<T>>; 2] {
        let two = T::of(2.0);
        [
            self.per_ion.iter().map(|m| m[0] * two).collect(),
            self.per_ion.iter().map(|m| m[1] * two).collect(),
        ]
    }
}

/// S_α = Σ_m z_m e^{iω_α t_m} for each mode.
pub fn mode_sums<T: Scalar>(seq: &PulseSequence<T>, modes: &NormalModes<T>) -> [Complex<T>; 2] {
    let compensated = seq.len() > COMPENSATED_SUM_THRESHOLD;
    let mut out = [Complex::new(T::zero(), T::zero()); 2];
    for (a, slot) in out.iter_mut().enumerate() {
        let w = modes.omega[a];
        let terms = seq.times().iter().zip(seq.directions()).map(|(&t, &z)| {
            let (s, c) = (w * t).sin_cos();
            let z = T::of(z as f64);
            (z * c, z * s)
        });
        *slot = if compensated {
            let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
            for (c, s) in terms {
                re.add(c);
                im.add(s);
            }
            Complex::new(re.value(), im.value())
        } else {
            terms.fold(Complex::new(T::zero(), T::zero()), |acc, (c, s)| {
                acc + Complex::new(c, s)
            })
        };
    }
    out
}

pub fn displacement_amplitudes<T: Scalar>(
    seq: &PulseSequence<T>,
    modes: &NormalModes<T>,
) -> Result<Displacements<T>> {
    seq.require_expanded()?;
    let sums = mode_sums(seq, modes);
    let two_i = Complex::new(T::zero(), T::of(2.0));
    let mut per_ion = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for a in 0..2 {
        for j in 0..2 {
            per_ion[a][j] = two_i * sums[a] * (modes.eta[a][j] * modes.b[a][j]);
        }
    }
    let plus = [per_ion[0][1] + per_ion[0][0], per_ion[1][1] + per_ion[1][0]];
    let minus = [per_ion[0][1] - per_ion[0][0], per_ion[1][1] - per_ion[1][0]];
    Ok(Displacements {
        per_ion,
        plus,
        minus,
    })
}

/// Σ_{n<m} z_n z_m sin(ω(t_m − t_n)) over time-ordered pairs.
fn pair_sine_sum<T: Scalar>(seq: &PulseSequence<T>, omega: T) -> T {
    let t = seq.times();
    let z = seq.directions();
    let compensated = seq.len() > COMPENSATED_SUM_THRESHOLD;
    let mut acc = CompensatedSum::new();
    let mut plain = T::zero();
    for m in 1..t.len() {
        for n in 0..m {
            let term = T::of((z[n] * z[m]) as f64) * (omega * (t[m] - t[n])).sin();
            if compensated {
                acc.add(term);
            } else {
                plain = plain + term;
            }
        }
    }
    if compensated {
        acc.value()
    } else {
        plain
    }
}

/// Θ = 8 Σ_α b_α⁽¹⁾b_α⁽²⁾η_α⁽¹⁾η_α⁽²⁾ Σ_{m>n} z_n z_m sin(ω_α(t_m − t_n)).
pub fn entangling_phase<T: Scalar>(seq: &PulseSequence<T>, modes: &NormalModes<T>) -> Result<T> {
    seq.require_expanded()?;
    let eight = T::of(8.0);
    Ok((0..2).fold(T::zero(), |acc, a| {
        acc + eight * modes.phase_coupling(a) * pair_sine_sum(seq, modes.omega[a])
    }))
}

/// Branch phases (Θ↑↑, Θ↓↑) = 16 Σ_α (η̄_α±)² Σ_{m>n} z_n z_m sin(ω_α(t_m − t_n)).
pub fn branch_phases<T: Scalar>(seq: &PulseSequence<T>, modes: &NormalModes<T>) -> Result<(T, T)> {
    seq.require_expanded()?;
    let sixteen = T::of(16.0);
    let mut uu = T::zero();
    let mut du = T::zero();
    for a in 0..2 {
        let p = pair_sine_sum(seq, modes.omega[a]);
        uu = uu + sixteen * modes.eta_bar_plus[a].powi(2) * p;
        du = du + sixteen * modes.eta_bar_minus[a].powi(2) * p;
    }
    Ok((uu, du))
}

/// |Σ_m z_m e^{iω_α t_m}| per mode; zero when spin and motion decouple for that mode.
pub fn motional_restoration_residual<T: Scalar>(
    seq: &PulseSequence<T>,
    modes: &NormalModes<T>,
) -> [T; 2] {
    let s = mode_sums(seq, modes);
    [s[0].norm(), s[1].norm()]
}

pub(crate) fn check_same_len<A, B>(a: &[A], b: &[B], what: &str) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(usage(format!(
            "{what}: length mismatch ({} vs {})",
            a.len(),
            b.len()
        )))
    }
}
