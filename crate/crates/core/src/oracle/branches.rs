use num_complex::Complex;

use crate::gate_dynamics::PulseSequence;
use crate::ion_physics::NormalModes;

/// Two-qubit computational branch; the first arrow is ion 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch::UpUp,
        Branch::UpDown,
        Branch::DownUp,
        Branch::DownDown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Per-kick displacement of this branch for mode `a`, before the factor z.
    fn kick(self, modes: &NormalModes, a: usize) -> Complex<f64> {
        let g = match self {
            Branch::UpUp => modes.eta_bar_plus[a],
            Branch::DownDown => -modes.eta_bar_plus[a],
            Branch::DownUp => modes.eta_bar_minus[a],
            Branch::UpDown => -modes.eta_bar_minus[a],
        };
        Complex::new(0.0, 4.0 * g)
    }
}

/// Coherent amplitudes (indexed `[branch][mode]`, interaction picture) and accumulated phases.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    pub amplitudes: [[Complex<f64>; 2]; 4],
    pub phases: [f64; 4],
}

impl BranchState {
    pub fn amplitude(&self, b: Branch, mode: usize) -> Complex<f64> {
        self.amplitudes[b.index()][mode]
    }

    pub fn phase(&self, b: Branch) -> f64 {
        self.phases[b.index()]
    }

    /// (Θ↑↑ − Θ↓↑)/2.
    pub fn entangling_phase(&self) -> f64 {
        0.5 * (self.phase(Branch::UpUp) - self.phase(Branch::DownUp))
    }

    pub fn beta_plus(&self) -> [Complex<f64>; 2] {
        self.amplitudes[Branch::UpUp.index()]
    }

    pub fn beta_minus(&self) -> [Complex<f64>; 2] {
        self.amplitudes[Branch::DownUp.index()]
    }

    /// Per-ion amplitudes `[ion][mode]` recovered from the ↑↑ and ↑↓ branches.
    pub fn per_ion(&self) -> [[Complex<f64>; 2]; 2] {
        let uu = self.amplitudes[Branch::UpUp.index()];
        let ud = self.amplitudes[Branch::UpDown.index()];
        [
            [uu[0] + ud[0], uu[1] + ud[1]],
            [uu[0] - ud[0], uu[1] - ud[1]],
        ]
    }
}

/// Kick-by-kick propagation of all four coherent branches from a common initial state.
///
/// Between kicks each amplitude rotates as β → β e^{−iωδt}; a kick α = 4i z η̄ adds
/// Im(α β*) to the branch phase and then displaces β → β + α. Times are measured from
/// t = 0, where every branch starts at `beta0`.
pub fn propagate_branches(
    seq: &PulseSequence,
    modes: &NormalModes,
    beta0: [Complex<f64>; 2],
) -> BranchState {
    let mut amplitudes = [beta0; 4];
    let mut phases = [0.0; 4];
    let mut t_prev = 0.0;
    for (&t, &z) in seq.times().iter().zip(seq.directions()) {
        let dt = t - t_prev;
        for b in Branch::ALL {
            let bi = b.index();
            for a in 0..2 {
                let rotated = amplitudes[bi][a] * Complex::from_polar(1.0, -modes.omega[a] * dt);
                let alpha = b.kick(modes, a) * z as f64;
                phases[bi] += (alpha * rotated.conj()).im;
                amplitudes[bi][a] = rotated + alpha;
            }
        }
        t_prev = t;
    }
    for amps in amplitudes.iter_mut() {
        for a in 0..2 {
            amps[a] *= Complex::from_polar(1.0, modes.omega[a] * t_prev);
        }
    }
    BranchState { amplitudes, phases }
}
