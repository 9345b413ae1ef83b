use std::f64::consts::FRAC_PI_4;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastgate::gate_dynamics::{displacement_amplitudes, entangling_phase, PulseSequence};
use fastgate::ion_physics::{normal_modes, TrapSetup, BUILTIN_PAIRS};
use fastgate::oracle::{propagate_branches, thermal_displacement_expectation_auto, Branch};

fn random_sequence(rng: &mut ChaCha8Rng, n: usize) -> PulseSequence {
    let kicks = (0..n)
        .map(|_| {
            (
                rng.random_range(0.0..3e-6),
                if rng.random_bool(0.5) { 1 } else { -1 },
            )
        })
        .collect();
    PulseSequence::from_unsorted(kicks).unwrap()
}

#[test]
fn branch_per_ion_amplitudes_match_analytic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for pair in BUILTIN_PAIRS {
        let modes = normal_modes::<f64>(&TrapSetup::builtin_pair(pair).unwrap()).unwrap();
        for _ in 0..20 {
            let seq = random_sequence(&mut rng, 12);
            let d = displacement_amplitudes(&seq, &modes).unwrap();
            let st = propagate_branches(&seq, &modes, [Complex::new(0.0, 0.0); 2]);
            let br = d.branch_per_ion();
            let oracle = st.per_ion();
            for m in 0..2 {
                for j in 0..2 {
                    assert!(
                        (br[j][m] - oracle[j][m]).norm() < 1e-12,
                        "{pair} mode {m} ion {j}"
                    );
                }
            }
        }
    }
}

#[test]
fn initial_displacement_is_carried_through_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let modes = normal_modes::<f64>(&TrapSetup::builtin_pair("ca43-sr88").unwrap()).unwrap();
    for _ in 0..20 {
        let seq = random_sequence(&mut rng, 10);
        let beta0 = [
            Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            Complex::new(0.3, -1.1),
        ];
        let cold = propagate_branches(&seq, &modes, [Complex::new(0.0, 0.0); 2]);
        let warm = propagate_branches(&seq, &modes, beta0);
        for b in Branch::ALL {
            for m in 0..2 {
                assert!((warm.amplitude(b, m) - cold.amplitude(b, m) - beta0[m]).norm() < 1e-12);
            }
        }
        let d = (cold.entangling_phase() - entangling_phase(&seq, &modes).unwrap())
            .rem_euclid(std::f64::consts::TAU);
        assert!(d.min(std::f64::consts::TAU - d) < 1e-10);
    }
}

#[test]
fn two_kick_phase_agrees_with_oracle() {
    let modes = normal_modes::<f64>(&TrapSetup::builtin_pair("ba133-ba138").unwrap()).unwrap();
    let seq = PulseSequence::new(vec![0.0, 1e-7], vec![1, 1]).unwrap();
    let st = propagate_branches(&seq, &modes, [Complex::new(0.0, 0.0); 2]);
    let theta = entangling_phase(&seq, &modes).unwrap();
    assert!((st.entangling_phase() - theta).abs() < 1e-12);
    assert!(theta.abs() < FRAC_PI_4);
}

#[test]
fn fock_sum_matches_closed_thermal_average() {
    for &nbar in &[0.0, 0.5, 1.0, 10.0] {
        for &b in &[0.0, 0.05, 0.3, 1.0] {
            let beta = Complex::new(b, -0.5 * b);
            let fock = thermal_displacement_expectation_auto(beta, nbar).unwrap();
            let closed = (-(nbar + 0.5) * beta.norm_sqr()).exp();
            assert!(
                (fock.re - closed).abs() < 1e-10 && fock.im == 0.0,
                "nbar {nbar} beta {b}"
            );
        }
    }
}
