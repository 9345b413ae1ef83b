use std::f64::consts::FRAC_PI_4;

use num_complex::Complex;
use proptest::prelude::*;

use fastgate::gate_dynamics::{
    displacement_amplitudes, entangling_phase, fidelity_exact_state_averaged, infidelity_terms,
    infidelity_truncated, GateSolution, PhaseTarget, PulseSequence,
};
use fastgate::ion_physics::{normal_modes, SpeciesSpec, TrapSetup, BUILTIN_PAIRS};
use fastgate::optimizer::{cost_stage2, GroupVector, SearchConfig};
use fastgate::robustness::{jitter_monte_carlo, NoiseSpec};

fn kicks(max: usize) -> impl Strategy<Value = Vec<(f64, i32)>> {
    prop::collection::vec(
        (
            0.0..2e-6f64,
            prop::bool::ANY.prop_map(|b| if b { 1 } else { -1 }),
        ),
        1..max,
    )
}

fn pair() -> impl Strategy<Value = TrapSetup> {
    (0..BUILTIN_PAIRS.len()).prop_map(|i| TrapSetup::builtin_pair(BUILTIN_PAIRS[i]).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_keeps_beta_magnitudes_and_theta(trap in pair(), k in kicks(24), dt in -1e-6..1e-6f64) {
        let modes = normal_modes::<f64>(&trap).unwrap();
        let seq = PulseSequence::from_unsorted(k).unwrap();
        let moved = seq.shifted(dt);
        let (a, b) = (displacement_amplitudes(&seq, &modes).unwrap(), displacement_amplitudes(&moved, &modes).unwrap());
        for m in 0..2 {
            for j in 0..2 {
                prop_assert!(close(a.per_ion[m][j].norm(), b.per_ion[m][j].norm(), 1e-9));
            }
        }
        let (t0, t1) = (entangling_phase(&seq, &modes).unwrap(), entangling_phase(&moved, &modes).unwrap());
        prop_assert!(close(t0, t1, 1e-9));
    }

    #[test]
    fn flip_negates_beta_and_keeps_theta(trap in pair(), k in kicks(24)) {
        let modes = normal_modes::<f64>(&trap).unwrap();
        let seq = PulseSequence::from_unsorted(k).unwrap();
        let flipped = seq.flipped();
        let (a, b) = (displacement_amplitudes(&seq, &modes).unwrap(), displacement_amplitudes(&flipped, &modes).unwrap());
        for m in 0..2 {
            for j in 0..2 {
                prop_assert_eq!(a.per_ion[m][j], -b.per_ion[m][j]);
            }
        }
        prop_assert_eq!(entangling_phase(&seq, &modes).unwrap(), entangling_phase(&flipped, &modes).unwrap());
    }

    #[test]
    fn restored_motion_is_temperature_blind(theta in -3.0..3.0f64, n1 in 0.0..100.0f64, n2 in 0.0..100.0f64) {
        let zero = [Complex::new(0.0, 0.0); 2];
        let cold = infidelity_truncated(theta, &zero, &zero, &[0.0, 0.0]).unwrap();
        let hot = infidelity_truncated(theta, &zero, &zero, &[n1, n2]).unwrap();
        prop_assert_eq!(cold, hot);
        let f0 = fidelity_exact_state_averaged(2.0 * theta, 0.0, &zero, &zero, &[0.0, 0.0]).unwrap();
        let f1 = fidelity_exact_state_averaged(2.0 * theta, 0.0, &zero, &zero, &[n1, n2]).unwrap();
        prop_assert_eq!(f0, f1);
    }

    #[test]
    fn identical_ions_decouple_cross_terms(mass in 5.0..200.0f64, k in kicks(16)) {
        let ion = SpeciesSpec::from_amu_nm("x", mass, 400.0).unwrap();
        let trap = TrapSetup::new(ion.clone(), ion, std::f64::consts::TAU * 1e6).unwrap();
        let modes = normal_modes::<f64>(&trap).unwrap();
        prop_assert!(modes.eta_bar_minus[0].abs() < 1e-12 * modes.eta_bar_plus[0]);
        prop_assert!(modes.eta_bar_plus[1].abs() < 1e-12 * modes.eta_bar_minus[1].abs());
        prop_assert!(close(modes.splitting() / modes.omega_ip(), 3f64.sqrt() - 1.0, 1e-12));
        let d = displacement_amplitudes(&PulseSequence::from_unsorted(k).unwrap(), &modes).unwrap();
        prop_assert!(d.minus[0].norm() <= 1e-12 * (1.0 + d.plus[0].norm()));
        prop_assert!(d.plus[1].norm() <= 1e-12 * (1.0 + d.minus[1].norm()));
    }

    #[test]
    fn terms_add_up(trap in pair(), k in kicks(24), n in 0.0..10.0f64) {
        let sol = GateSolution::evaluate(&trap, PulseSequence::from_unsorted(k).unwrap(), vec![n, n], PhaseTarget::Plus).unwrap();
        prop_assert_eq!(sol.phase_term + sol.motional_term, sol.infidelity);
        let t = infidelity_terms(sol.theta, &sol.beta_plus, &sol.beta_minus, &sol.nbar, sol.target).unwrap();
        prop_assert!(close(t.total(), sol.infidelity, 1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn separated_groups_pay_no_overlap_penalty(
        groups in prop::collection::vec((prop_oneof![-3..=-1i32, 1..=3i32], 13.0e-9..200e-9f64), 2..8),
    ) {
        let mut cfg = SearchConfig::new(TrapSetup::builtin_pair("ba133-ba138").unwrap(), 2e-6);
        cfg.n_groups = groups.len();
        let half = |z: i32| (z.unsigned_abs() - 1) as f64 * cfg.min_separation / 2.0;
        let mut z = Vec::new();
        let mut centres = Vec::new();
        let mut edge = 0.0;
        for &(amp, gap) in &groups {
            if z.iter().map(|v: &i32| v.unsigned_abs()).sum::<u32>() + amp.unsigned_abs() > 20 {
                break;
            }
            let c = if centres.is_empty() { 0.0 } else { edge + gap + half(amp) };
            edge = c + half(amp);
            z.push(amp);
            centres.push(c);
        }
        let gv = GroupVector { z, group_times: centres.clone() };
        let cost = cost_stage2(&centres, &gv, &cfg).unwrap();
        let eps = GateSolution::evaluate(&cfg.trap, fastgate::optimizer::expand_groups(&gv, cfg.min_separation), vec![1.0, 1.0], cfg.phase_target).unwrap().infidelity;
        prop_assert!((cost - eps).abs() <= 1e-8, "{cost} vs {eps}");
    }

    #[test]
    fn jitter_is_seeded_and_decomposes(seed in 0u64..1000, sigma in 1e-11..1e-9f64) {
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 2e-7).collect();
        let seq = PulseSequence::new(times, vec![1, -1, -1, 1, 1, -1]).unwrap();
        let sol = GateSolution::evaluate(&TrapSetup::builtin_pair("ca43-sr88").unwrap(), seq, vec![1.0, 1.0], PhaseTarget::Plus).unwrap();
        let spec = NoiseSpec::jitter(sigma, 200, seed);
        let a = jitter_monte_carlo(&sol, sigma, &spec).unwrap();
        let b = jitter_monte_carlo(&sol, sigma, &spec).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(close(a.phase_term + a.motional_term, a.mean_error, 1e-12));
        prop_assert!(a.std_error >= 0.0);
    }
}

#[test]
fn quarter_pi_phase_with_no_residual_is_perfect() {
    let zero = [Complex::new(0.0, 0.0); 2];
    assert_eq!(
        infidelity_truncated(FRAC_PI_4, &zero, &zero, &[1.0, 1.0]).unwrap(),
        0.0
    );
    assert!(
        (fidelity_exact_state_averaged(2.0 * FRAC_PI_4, 0.0, &zero, &zero, &[1.0, 1.0]).unwrap()
            - 1.0)
            .abs()
            < 1e-15
    );
}
