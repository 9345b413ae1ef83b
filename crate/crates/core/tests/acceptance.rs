//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastgate::gate_dynamics::{
    fidelity_exact_state_averaged, fidelity_state_dependent, infidelity_truncated, GateSolution,
    PhaseTarget, PulseSequence,
};
use fastgate::ion_physics::{normal_modes, Mode, SpeciesSpec, TrapSetup, BUILTIN_PAIRS};
use fastgate::optimizer::{search, universal_rescale, SearchConfig};
use fastgate::oracle::{average_over_3sphere, brute_force_modes, propagate_branches};
use fastgate::robustness::{
    dephasing_error, frequency_drift_sweep, heating_error, jitter_monte_carlo, jitter_sweep,
    log_log_slope, reprate_drift_sweep, sdk_error_bound, DriftAxis, DriftScale, NoiseSpec,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn mode_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ion1 = SpeciesSpec::from_amu_nm("a", 40.0, 400.0).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let mu = 10f64.powf(rng.random_range(-2.0..2.0));
        let ion2 = SpeciesSpec::new("b", ion1.mass * mu, 400e-9).unwrap();
        let trap = TrapSetup::new(ion1.clone(), ion2, TAU * 1e6).unwrap();
        let a = normal_modes::<f64>(&trap).unwrap();
        let b = brute_force_modes(&trap).unwrap();
        for m in 0..2 {
            worst = worst.max(((a.omega[m] - b.omega[m]) / b.omega[m]).abs());
            for j in 0..2 {
                worst = worst.max((a.b[m][j] - b.b[m][j]).abs());
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("max relative deviation {worst:.2e} over 10^4 mass ratios"),
    )
}

fn yb_be_modes() -> Outcome {
    let m = normal_modes::<f64>(&TrapSetup::builtin_pair("yb171-be9").unwrap()).unwrap();
    let (ip, op) = (m.omega_ip() / TAU / 1e6, m.omega_op() / TAU / 1e6);
    check(
        (ip - 1.22).abs() <= 0.005 && (op - 6.21).abs() <= 0.01,
        format!("omega_ip/2pi = {ip:.5} MHz, omega_op/2pi = {op:.5} MHz"),
    )
}

fn dynamics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut db, mut dt) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let trap = TrapSetup::builtin_pair(BUILTIN_PAIRS[i % BUILTIN_PAIRS.len()]).unwrap();
        let modes = normal_modes::<f64>(&trap).unwrap();
        let n = rng.random_range(1..=30);
        let kicks: Vec<(f64, i32)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(0.0..2e-6),
                    if rng.random_bool(0.5) { 1 } else { -1 },
                )
            })
            .collect();
        let seq = PulseSequence::from_unsorted(kicks).unwrap();
        let sol = GateSolution::evaluate(&trap, seq, vec![1.0, 1.0], PhaseTarget::Plus).unwrap();
        let st = propagate_branches(&sol.sequence, &modes, [c(0.0, 0.0); 2]);
        for (x, y) in sol
            .beta_plus
            .iter()
            .zip(st.beta_plus())
            .chain(sol.beta_minus.iter().zip(st.beta_minus()))
        {
            db = db.max((x - y).norm());
        }
        let d = (st.entangling_phase() - sol.theta).rem_euclid(TAU);
        dt = dt.max(d.min(TAU - d));
    }
    check(
        db <= 1e-10 && dt <= 1e-10,
        format!("max |dbeta| = {db:.2e}, max |dTheta| = {dt:.2e} rad"),
    )
}

/// Per-mode amplitudes β⁽¹⁾ = c₁S, β⁽²⁾ = c₂S in the branch convention.
fn collinear(rng: &mut ChaCha8Rng, scale: f64) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
    let mut b1 = Vec::new();
    let mut b2 = Vec::new();
    for _ in 0..2 {
        let s = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        b1.push(s * rng.random_range(-1.0..1.0));
        b2.push(s * rng.random_range(-1.0..1.0));
    }
    (b1, b2)
}

/// Collinear branch-convention amplitudes whose β± = (β⁽²⁾ ± β⁽¹⁾)/2 stay within `bound`.
fn small_collinear(rng: &mut ChaCha8Rng, bound: f64) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
    let (mut b1, mut b2) = collinear(rng, 1.0);
    for (x, y) in b1.iter_mut().zip(b2.iter_mut()) {
        let m = ((*y + *x) * 0.5).norm().max(((*y - *x) * 0.5).norm());
        if m > 0.0 {
            let k = bound * rng.random_range(0.0..1.0) / m;
            *x *= k;
            *y *= k;
        }
    }
    (b1, b2)
}

fn fidelity_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut dq, mut dt) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let nbar = [rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)];
        let theta_du = rng.random_range(-PI..PI);
        let theta_uu = theta_du + 2.0 * (FRAC_PI_4 + rng.random_range(-0.5..0.5));
        let (b1, b2) = collinear(&mut rng, 0.6);
        let exact = fidelity_exact_state_averaged(theta_uu, theta_du, &b1, &b2, &nbar).unwrap();
        let q = average_over_3sphere(
            |p| fidelity_state_dependent(p, theta_uu, theta_du, &b1, &b2, &nbar).unwrap(),
            16,
        )
        .unwrap();
        dq = dq.max((exact - q.value).abs());

        // Small errors: |ΔΦ| and every β± entering the truncated form within 1e-2, default n̄ = 1.
        let theta_uu = theta_du + 2.0 * (FRAC_PI_4 + rng.random_range(-1e-2..1e-2));
        let (b1, b2) = small_collinear(&mut rng, 1e-2);
        let ones = [1.0, 1.0];
        let exact = fidelity_exact_state_averaged(theta_uu, theta_du, &b1, &b2, &ones).unwrap();
        let bp: Vec<_> = b1.iter().zip(&b2).map(|(x, y)| (y + x) * 0.5).collect();
        let bm: Vec<_> = b1.iter().zip(&b2).map(|(x, y)| (y - x) * 0.5).collect();
        let trunc = infidelity_truncated(0.5 * (theta_uu - theta_du), &bp, &bm, &ones).unwrap();
        dt = dt.max((1.0 - exact - trunc).abs());
    }
    check(
        dq <= 1e-8 && dt <= 1e-6,
        format!("|exact - quadrature| <= {dq:.2e}, |(1-F) - truncated| <= {dt:.2e} over 100 configurations"),
    )
}

fn temperature_insensitivity(sols: &[&GateSolution]) -> Outcome {
    let mut worst = 0.0f64;
    let mut residual = 0.0f64;
    for s in sols {
        residual = residual.max(
            s.restoration_residual()
                .unwrap()
                .into_iter()
                .fold(0.0, f64::max),
        );
        let base = GateSolution::evaluate(&s.trap, s.sequence.clone(), vec![0.0, 0.0], s.target)
            .unwrap()
            .infidelity;
        for n in [1.0, 10.0, 100.0] {
            let e = GateSolution::evaluate(&s.trap, s.sequence.clone(), vec![n, n], s.target)
                .unwrap()
                .infidelity;
            worst = worst.max((e - base).abs());
        }
    }
    check(
        residual <= 1e-8 && worst < 1e-12,
        format!(
            "max residual {residual:.2e}, max eps change {worst:.2e} over nbar in {{0,1,10,100}}"
        ),
    )
}

fn ca_sr_search() -> (Outcome, Option<GateSolution>) {
    for seed in 0..5 {
        let mut cfg = SearchConfig::new(TrapSetup::builtin_pair("ca43-sr88").unwrap(), 1.8e-6);
        cfg.n_groups = 20;
        cfg.n_max = 6;
        cfg.ensemble_size = 2000;
        cfg.seed = seed;
        let Ok(s) = search(&cfg) else { continue };
        if s.n_sdks <= 6 && s.gate_time <= 1.9e-6 && s.infidelity <= 1e-3 {
            let d = format!(
                "seed {seed}: N = {}, tau_G = {:.1} ns, eps = {:.2e}",
                s.n_sdks,
                s.gate_time * 1e9,
                s.infidelity
            );
            return (Ok(d), Some(s));
        }
    }
    (
        Err("no solution with N <= 6, tau_G <= 1.9 us, eps <= 1e-3 over seeds 0..5".into()),
        None,
    )
}

fn ba_ba_search() -> (Outcome, Option<GateSolution>) {
    let mut cfg = SearchConfig::new(TrapSetup::builtin_pair("ba133-ba138").unwrap(), 0.8e-6);
    cfg.n_max = 16;
    cfg.ensemble_size = 2000;
    match search(&cfg) {
        Ok(s) => {
            let ok = s.n_sdks <= 16 && s.gate_time <= 850e-9 && s.infidelity <= 1e-3;
            let d = format!(
                "N = {}, tau_G = {:.1} ns, eps = {:.2e}",
                s.n_sdks,
                s.gate_time * 1e9,
                s.infidelity
            );
            (check(ok, d), Some(s))
        }
        Err(e) => (Err(e.to_string()), None),
    }
}

fn jitter(sol: &GateSolution) -> Outcome {
    let p = jitter_monte_carlo(sol, 1e-9, &NoiseSpec::jitter(1e-9, 10_000, 0)).unwrap();
    let grid: Vec<f64> = (0..9).map(|i| 1e-11 * 10f64.powf(i as f64 / 4.0)).collect();
    let r = jitter_sweep(sol, &grid, &NoiseSpec::jitter(0.0, 10_000, 0)).unwrap();
    let slope = log_log_slope(&r.grid, &r.mean_error).unwrap_or(f64::NAN);
    check(
        (3e-5..=3e-3).contains(&p.mean_error) && (slope - 2.0).abs() <= 0.3,
        format!(
            "mean eps at 1 ns = {:.2e} (std {:.2e}), slope over 10 ps..1 ns = {slope:.3}",
            p.mean_error, p.std_error
        ),
    )
}

fn drift(sol: &GateSolution) -> Outcome {
    let abs =
        frequency_drift_sweep(sol, DriftAxis::OpOnly, DriftScale::Absolute, &[TAU * 1e3]).unwrap();
    let frac = frequency_drift_sweep(
        sol,
        DriftAxis::OpOnly,
        DriftScale::Fractional,
        &[1e-3, 1e-2],
    )
    .unwrap();
    let (e1k, e01, e1) = (abs.mean_error[0], frac.mean_error[0], frac.mean_error[1]);
    let within_decade = |e: f64, r: f64| e >= r / 10.0 && e <= r * 10.0;
    check(
        (3e-5..=3e-3).contains(&e1k) && within_decade(e01, 1e-4) && within_decade(e1, 1e-2),
        format!("op 2pi*1 kHz: {e1k:.2e}; op 0.1%: {e01:.2e}; op 1%: {e1:.2e}"),
    )
}

fn reprate() -> Outcome {
    let mut cfg = SearchConfig::new(TrapSetup::builtin_pair("ca43-sr88").unwrap(), 1.8e-6);
    cfg.n_groups = 16;
    cfg.n_max = 6;
    cfg.ensemble_size = 2000;
    let s = match search(&cfg) {
        Ok(s) => s,
        Err(e) => return Err(e.to_string()),
    };
    let gap = s.sequence.min_gap().unwrap_or(f64::INFINITY);
    let grid: Vec<f64> = (0..=20).map(|i| -0.1 + 0.01 * i as f64).collect();
    let r = reprate_drift_sweep(&s, cfg.min_separation, &grid).unwrap();
    let worst = r
        .mean_error
        .iter()
        .map(|e| (e - s.infidelity).abs())
        .fold(0.0, f64::max);
    check(
        (s.gate_time - 1.8e-6).abs() <= 0.1e-6 && gap > 50e-9 && worst <= 1e-6,
        format!(
            "tau_G = {:.1} ns, min gap {:.1} ns, eps = {:.2e}, max |d eps| over +-10% = {worst:.2e}",
            s.gate_time * 1e9,
            gap * 1e9,
            s.infidelity
        ),
    )
}

fn budgets() -> Outcome {
    let f = sdk_error_bound(5, 7e-3).unwrap().fidelity;
    let d = dephasing_error(4e-3, 1.6e-6).unwrap();
    let h = heating_error(100.0, 1e-6).unwrap();
    // 1e-6 has no exact binary form; the product of the two inputs is within one ulp of 1e-4.
    let h_ok = (h - 1e-4).abs() <= f64::EPSILON * 1e-4;
    check(
        (f - 0.9312).abs() <= 1e-4 && (d - 4.0e-4).abs() <= 0.1e-4 && h_ok,
        format!("F >= {f:.6}, dephasing {d:.4e}, heating {h:e}"),
    )
}

fn frontier_point(pair: &str, x: f64, n_max: u32) -> (f64, Option<GateSolution>) {
    let trap = TrapSetup::builtin_pair(pair).unwrap();
    let modes = normal_modes::<f64>(&trap).unwrap();
    let tau = x * TAU / modes.splitting();
    let mut cfg = SearchConfig::new(trap, tau);
    cfg.ensemble_size = 500;
    cfg.n_max = n_max;
    let sol = search(&cfg).ok().filter(|s| s.status.is_success());
    (modes.effective_coupling(Mode::Ip), sol)
}

fn rescaling() -> Outcome {
    let x = 0.5;
    let mut band = Vec::new();
    let mut detail = Vec::new();
    for pair in ["ca43-sr88", "ca43-ca40", "ba133-ba138"] {
        let (_, sol) = frontier_point(pair, x, 30);
        let Some(sol) = sol else {
            return Err(format!("{pair}: no frontier point at x = {x}"));
        };
        let p = universal_rescale(std::slice::from_ref(&sol), Mode::Ip).unwrap()[0];
        detail.push(format!("{pair} N={} -> {:.3}", sol.n_sdks, p.scaled_sdks));
        band.push(p.scaled_sdks);
    }
    let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = band.iter().cloned().fold(0.0, f64::max);
    // Yb–Be counts within the factor-2 band need at most this many kicks.
    let eta = normal_modes::<f64>(&TrapSetup::builtin_pair("yb171-be9").unwrap())
        .unwrap()
        .effective_coupling(Mode::Ip);
    let cap = ((2.0 * lo / eta).floor() as u32).max(1);
    let (_, yb) = frontier_point("yb171-be9", x, cap);
    let yb_deviates = match &yb {
        None => {
            detail.push(format!(
                "yb171-be9: none with N <= {cap}, so eta*N > {:.3}",
                eta * (cap + 1) as f64
            ));
            true
        }
        Some(s) => {
            let v = eta * s.n_sdks as f64;
            detail.push(format!("yb171-be9 N={} -> {v:.3}", s.n_sdks));
            v.max(hi) / v.min(lo) > 2.0
        }
    };
    check(
        hi / lo <= 2.0 && yb_deviates,
        format!("{} (spread {:.2})", detail.join("; "), hi / lo),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS criterion {id:>2} {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failures += 1;
                println!("FAIL criterion {id:>2} {name}: {d} [{secs:.1} s]");
            }
        }
    };
    report(1, "mode-structure oracle", &mut mode_oracle);
    report(2, "Yb-Be mode frequencies", &mut yb_be_modes);
    report(3, "analytic vs oracle dynamics", &mut dynamics_oracle);
    report(4, "fidelity consistency", &mut fidelity_consistency);

    // Criterion 5 reuses the solutions found by 6 and 7, so those searches run first.
    let t = Instant::now();
    let (c6, ca_sr) = ca_sr_search();
    let t6 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let (c7, ba_ba) = ba_ba_search();
    let t7 = t.elapsed().as_secs_f64();
    let found: Vec<&GateSolution> = ca_sr.iter().chain(ba_ba.iter()).collect();
    report(5, "temperature insensitivity", &mut || {
        if found.is_empty() {
            Err("no converged solution to test".into())
        } else {
            temperature_insensitivity(&found)
        }
    });
    let timed = |r: Outcome, secs: f64| {
        r.map(|d| format!("{d}, search {secs:.1} s"))
            .map_err(|d| format!("{d}, search {secs:.1} s"))
    };
    let mut c6 = Some(timed(c6, t6));
    let mut c7 = Some(timed(c7, t7));
    report(6, "Ca-Sr search", &mut || c6.take().unwrap());
    report(7, "Ba-Ba search", &mut || c7.take().unwrap());
    report(8, "jitter robustness", &mut || match &ca_sr {
        Some(s) => jitter(s),
        None => Err("criterion-6 solution unavailable".into()),
    });
    report(9, "drift robustness", &mut || match &ca_sr {
        Some(s) => drift(s),
        None => Err("criterion-6 solution unavailable".into()),
    });
    report(10, "rep-rate immunity", &mut reprate);
    report(11, "closed-form budgets", &mut budgets);
    report(12, "universal rescaling", &mut rescaling);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
