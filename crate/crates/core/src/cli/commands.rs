use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::{parse_grid, preset};
use super::manifest::{ManifestBuilder, RunManifest};
use super::{
    ClampArg, CliError, CliResult, EvaluateArgs, OracleCheckArgs, ParetoArgs, SolveArgs, SweepArgs,
    SweepKind, TrapArgs, EVALUATION_SCHEMA, EXIT_BEST_EFFORT, EXIT_DATA, EXIT_OK, PARETO_SCHEMA,
    SWEEP_SCHEMA,
};
use crate::error::Error;
use crate::gate_dynamics::{
    infidelity_terms, wrap_phase, GateSolution, PhaseTarget, PulseSequence,
};
use crate::ion_physics::{normal_modes, SpeciesTable, TrapSetup, BUILTIN_PAIRS};
use crate::optimizer::{search, universal_rescale, SearchConfig};
use crate::oracle::propagate_branches;
use crate::robustness::{
    frequency_drift_sweep, jitter_sweep, reprate_drift_sweep, ClampRule, DriftAxis, DriftScale,
    NoiseKind, NoiseSpec, SweepResult,
};

fn species_table() -> CliResult<SpeciesTable> {
    SpeciesTable::from_env().map_err(|e| CliError::data(format!("species table: {e}")))
}

/// The trap named by the flags, if they name species at all.
fn trap_from_flags(args: &TrapArgs) -> CliResult<Option<TrapSetup>> {
    let (a, b) = match (&args.pair, &args.ion1, &args.ion2) {
        (Some(p), _, _) => species_table()?.pair(p)?,
        (None, Some(a), Some(b)) => {
            let t = species_table()?;
            (t.get(a)?.clone(), t.get(b)?.clone())
        }
        _ => return Ok(None),
    };
    let f = args.trap_freq_hz.unwrap_or(1e6);
    Ok(Some(TrapSetup::with_tilt(
        a,
        b,
        TAU * f,
        args.tilt.unwrap_or(FRAC_PI_4),
    )?))
}

fn require_trap(args: &TrapArgs) -> CliResult<TrapSetup> {
    trap_from_flags(args)?
        .ok_or_else(|| CliError::usage("--pair (or --ion1 and --ion2) is required"))
}

fn read_text(mb: &mut ManifestBuilder, path: &Path) -> CliResult<String> {
    let bytes = mb
        .read_input(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    String::from_utf8(bytes)
        .map_err(|_| CliError::data(format!("{}: not valid UTF-8", path.display())))
}

fn load_solution(mb: &mut ManifestBuilder, path: &Path) -> CliResult<GateSolution> {
    let text = read_text(mb, path)?;
    GateSolution::from_json(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn to_json_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Write `body` after a `# schema=… manifest=…` line, with the manifest as a sidecar file.
fn write_csv(
    out: &Path,
    schema: &str,
    tags: &str,
    body: &str,
    manifest: &RunManifest,
) -> CliResult<()> {
    let side = sidecar_path(out);
    let side_name = side
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = format!("# schema={schema} {tags} manifest={side_name}\n{body}");
    write_file(out, &text)?;
    let json = serde_json::to_string_pretty(manifest).map_err(Error::from)?;
    write_file(&side, &(json + "\n"))
}

fn build_config(a: &SolveArgs, mb: &mut ManifestBuilder) -> CliResult<SearchConfig> {
    let flag_trap = trap_from_flags(&a.trap)?;
    let mut cfg = match &a.config {
        Some(path) => {
            let text = read_text(mb, path)?;
            let mut table: toml::Table = toml::from_str(&text)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let file_pair = table.remove("pair");
            let file_freq = table.remove("trap_freq_hz");
            let trap = match (flag_trap.clone(), file_pair) {
                (Some(t), _) => Some(t),
                (None, Some(toml::Value::String(p))) => {
                    let (x, y) = species_table()?.pair(&p)?;
                    let f = match file_freq {
                        Some(toml::Value::Float(f)) => f,
                        Some(toml::Value::Integer(i)) => i as f64,
                        Some(_) => return Err(CliError::data("trap_freq_hz must be a number")),
                        None => 1e6,
                    };
                    Some(TrapSetup::new(
                        x,
                        y,
                        TAU * a.trap.trap_freq_hz.unwrap_or(f),
                    )?)
                }
                (None, Some(_)) => return Err(CliError::data("pair must be a string")),
                (None, None) => None,
            };
            if let Some(t) = trap {
                let v = toml::Value::try_from(&t).map_err(|e| CliError::data(e.to_string()))?;
                table.insert("trap".into(), v);
            }
            if let Some(g) = a.gate_time {
                table.insert("gate_time".into(), toml::Value::Float(g));
            }
            toml::Value::Table(table)
                .try_into::<SearchConfig>()
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        }
        None => {
            let trap = flag_trap
                .clone()
                .ok_or_else(|| CliError::usage("--pair (or --ion1 and --ion2) is required"))?;
            let g = a
                .gate_time
                .ok_or_else(|| CliError::usage("--gate-time is required"))?;
            SearchConfig::new(trap, g)
        }
    };
    if flag_trap.is_none() {
        if let Some(f) = a.trap.trap_freq_hz {
            cfg.trap.omega0_ion1 = TAU * f;
        }
        if let Some(t) = a.trap.tilt {
            cfg.trap.beam_tilt = t;
        }
    }
    if let Some(v) = a.nmax {
        cfg.n_max = v;
    }
    if let Some(v) = a.nmax_start {
        cfg.n_max_start = v;
    }
    if let Some(v) = a.groups {
        cfg.n_groups = v;
    }
    if let Some(v) = a.ensemble {
        cfg.ensemble_size = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.target {
        cfg.target_infidelity = v;
    }
    if let Some(v) = a.phase_target {
        cfg.phase_target = v.into();
    }
    if let Some(v) = &a.nbar {
        cfg.nbar = [v[0], v[1]];
    }
    if a.max_refine.is_some() {
        cfg.max_refine = a.max_refine;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summary(sol: &GateSolution) -> String {
    format!(
        "tau_G = {:.6e} s  N = {}  eps = {:.6e}  theta = {:.9}  status = {}",
        sol.gate_time,
        sol.n_sdks,
        sol.infidelity,
        sol.theta,
        to_json_value(&sol.status).as_str().unwrap_or("?")
    )
}

pub fn solve(a: SolveArgs) -> CliResult<i32> {
    let mut mb = ManifestBuilder::start("solve");
    let cfg = build_config(&a, &mut mb)?;
    log::info!(
        "solving {} at tau_G = {:e} s, N_max {}..={}, {} restarts, seed {}",
        cfg.trap.pair_name(),
        cfg.gate_time,
        cfg.n_max_start,
        cfg.n_max,
        cfg.ensemble_size,
        cfg.seed
    );
    let mut sol = match search(&cfg) {
        Ok(s) => s,
        Err(Error::SearchFailed(msg)) => {
            eprintln!("no solution: {msg}");
            return Ok(EXIT_BEST_EFFORT);
        }
        Err(e) => return Err(e.into()),
    };
    sol.manifest = Some(to_json_value(
        &mb.finish(to_json_value(&cfg), vec![cfg.seed]),
    ));
    let json = sol.to_json()? + "\n";
    match &a.out {
        Some(path) => {
            write_file(path, &json)?;
            println!("{}", summary(&sol));
        }
        None => {
            print!("{json}");
            eprintln!("{}", summary(&sol));
        }
    }
    Ok(if sol.status.is_success() {
        EXIT_OK
    } else {
        EXIT_BEST_EFFORT
    })
}

#[derive(Debug, Serialize)]
struct EvaluationReport {
    schema: &'static str,
    pair: String,
    n_sdks: u32,
    gate_time: f64,
    nbar: Vec<f64>,
    target: PhaseTarget,
    theta: f64,
    infidelity: f64,
    phase_term: f64,
    motional_term: f64,
    restoration_residual: [f64; 2],
    oracle_theta: f64,
    oracle_infidelity: f64,
    /// Largest analytic-vs-oracle difference over Θ and every β±.
    oracle_discrepancy: f64,
    /// Largest difference between the stored figures and a fresh evaluation.
    stored_deviation: Option<f64>,
    manifest: RunManifest,
}

fn figure_deviation(a: &GateSolution, b: &GateSolution) -> f64 {
    let beta = a
        .beta_plus
        .iter()
        .zip(&b.beta_plus)
        .chain(a.beta_minus.iter().zip(&b.beta_minus))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let len_mismatch =
        a.beta_plus.len() != b.beta_plus.len() || a.beta_minus.len() != b.beta_minus.len();
    let d = wrap_phase(a.theta - b.theta)
        .abs()
        .max((a.infidelity - b.infidelity).abs())
        .max(beta);
    if len_mismatch {
        f64::INFINITY
    } else {
        d
    }
}

pub fn evaluate(a: EvaluateArgs) -> CliResult<i32> {
    let mut mb = ManifestBuilder::start("evaluate");
    let (base, stored) = match &a.solution {
        Some(path) => {
            let sol = load_solution(&mut mb, path)?;
            (sol.clone(), Some(sol))
        }
        None => {
            let trap = require_trap(&a.trap)?;
            let (Some(t), Some(z)) = (&a.times, &a.directions) else {
                return Err(CliError::usage(
                    "give --solution or both --times and --directions",
                ));
            };
            let seq = PulseSequence::new(t.clone(), z.clone())?;
            (
                GateSolution::evaluate(&trap, seq, vec![1.0, 1.0], PhaseTarget::Plus)?,
                None,
            )
        }
    };
    let stored_deviation = match &stored {
        Some(s) => Some(figure_deviation(s, &s.reevaluate()?)),
        None => None,
    };
    let nbar = a.nbar.clone().unwrap_or_else(|| base.nbar.clone());
    let target = a.phase_target.map_or(base.target, Into::into);
    let fresh = GateSolution::evaluate(&base.trap, base.sequence.clone(), nbar.clone(), target)?;
    let modes = normal_modes(&fresh.trap)?;
    let state = propagate_branches(&fresh.sequence, &modes, [Complex::new(0.0, 0.0); 2]);
    let oracle_theta = wrap_phase(state.entangling_phase());
    let (bp, bm) = (state.beta_plus(), state.beta_minus());
    let oracle_infidelity = infidelity_terms(oracle_theta, &bp, &bm, &nbar, target)?.total();
    let oracle_discrepancy = fresh
        .beta_plus
        .iter()
        .zip(&bp)
        .chain(fresh.beta_minus.iter().zip(&bm))
        .map(|(x, y)| (x - y).norm())
        .fold(wrap_phase(oracle_theta - fresh.theta).abs(), f64::max);

    println!("{}", summary(&fresh));
    println!("oracle: theta = {oracle_theta:.9}  eps = {oracle_infidelity:.6e}  max discrepancy = {oracle_discrepancy:.3e}");
    if oracle_discrepancy > 1e-10 {
        log::warn!("analytic and oracle dynamics differ by {oracle_discrepancy:.3e}");
    }
    if let Some(d) = stored_deviation {
        println!("stored figures: max deviation from recomputation = {d:.3e}");
        if d > 1e-10 {
            log::warn!("stored figures differ from a fresh evaluation by {d:.3e}; the file may have been edited");
        }
    }
    let seeds = base
        .search_meta
        .as_ref()
        .map(|m| vec![m.seed])
        .unwrap_or_default();
    let config = serde_json::json!({
        "solution": a.solution.as_ref().map(|p| p.display().to_string()),
        "nbar": nbar,
        "target": target,
    });
    let report = EvaluationReport {
        schema: EVALUATION_SCHEMA,
        pair: fresh.trap.pair_name(),
        n_sdks: fresh.n_sdks,
        gate_time: fresh.gate_time,
        nbar,
        target,
        theta: fresh.theta,
        infidelity: fresh.infidelity,
        phase_term: fresh.phase_term,
        motional_term: fresh.motional_term,
        restoration_residual: fresh.restoration_residual()?,
        oracle_theta,
        oracle_infidelity,
        oracle_discrepancy,
        stored_deviation,
        manifest: mb.finish(config, seeds),
    };
    if let Some(out) = &a.out {
        let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        write_file(out, &(json + "\n"))?;
    }
    Ok(EXIT_OK)
}

fn sweep_csv(r: &SweepResult) -> String {
    let mut s =
        String::from("magnitude,mean_error,std_error,phase_term,motional_term,standard_error\n");
    for p in r.points() {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.magnitude, p.mean_error, p.std_error, p.phase_term, p.motional_term, p.standard_error
        );
    }
    s
}

fn kind_name(k: NoiseKind) -> String {
    to_json_value(&k).as_str().unwrap_or("?").to_string()
}

pub fn sweep(a: SweepArgs) -> CliResult<i32> {
    let mut mb = ManifestBuilder::start("sweep");
    let preset = a.preset.as_deref().map(preset).transpose()?;
    let sol = load_solution(&mut mb, &a.solution)?;
    let kind = match (a.kind, &preset) {
        (Some(SweepKind::Jitter), _) => NoiseKind::TimingJitter,
        (Some(SweepKind::OpDrift), _) => NoiseKind::OpDrift,
        (Some(SweepKind::CommonDrift), _) => NoiseKind::CommonDrift,
        (Some(SweepKind::Reprate), _) => NoiseKind::ReprateDrift,
        (None, Some(p)) => p.kind,
        (None, None) => return Err(CliError::usage("give --kind or --preset")),
    };
    let grid = match (&a.grid, &preset) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(p)) => p.grid.clone(),
        (None, None) => return Err(CliError::usage("give --grid or --preset")),
    };
    let scale = if a.fractional || kind == NoiseKind::ReprateDrift {
        DriftScale::Fractional
    } else {
        preset
            .as_ref()
            .filter(|p| p.kind == kind)
            .map_or(DriftScale::Absolute, |p| p.scale)
    };
    let samples = a
        .samples
        .or(preset
            .as_ref()
            .filter(|p| p.kind == kind)
            .map(|p| p.samples))
        .unwrap_or(10_000);
    let spec = NoiseSpec {
        n_samples: if kind == NoiseKind::TimingJitter {
            samples
        } else {
            1
        },
        seed: a.seed,
        min_separation: a.min_separation,
        clamp: match a.clamp {
            ClampArg::Forward => ClampRule::ForwardSweep,
            ClampArg::Reject => ClampRule::Reject,
        },
        ..NoiseSpec::new(kind, grid.iter().cloned().fold(0.0, f64::max))
    };
    log::info!("{} sweep over {} grid points", kind_name(kind), grid.len());
    let result = match kind {
        NoiseKind::TimingJitter => jitter_sweep(&sol, &grid, &spec)?,
        NoiseKind::OpDrift => frequency_drift_sweep(&sol, DriftAxis::OpOnly, scale, &grid)?,
        NoiseKind::CommonDrift => frequency_drift_sweep(&sol, DriftAxis::Common, scale, &grid)?,
        NoiseKind::ReprateDrift => reprate_drift_sweep(&sol, a.min_separation, &grid)?,
    };
    let config = serde_json::json!({
        "solution": a.solution.display().to_string(),
        "preset": a.preset,
        "scale": scale,
        "grid": grid,
        "noise": spec,
    });
    let manifest = mb.finish(config, vec![a.seed]);
    let tags = format!(
        "kind={} scale={}",
        kind_name(kind),
        to_json_value(&scale).as_str().unwrap_or("?")
    );
    write_csv(&a.out, SWEEP_SCHEMA, &tags, &sweep_csv(&result), &manifest)?;
    println!("wrote {} rows to {}", result.len(), a.out.display());
    Ok(EXIT_OK)
}

pub fn pareto(a: ParetoArgs) -> CliResult<i32> {
    let mb = ManifestBuilder::start("pareto");
    let trap = require_trap(&a.trap)?;
    let grid = parse_grid(&a.grid)?;
    let mut configs = Vec::with_capacity(grid.len());
    for &tau in &grid {
        let mut cfg = SearchConfig::new(trap.clone(), tau);
        cfg.n_max = a.nmax;
        cfg.n_max_start = a.nmax_start;
        cfg.ensemble_size = a.ensemble;
        cfg.n_groups = a.groups;
        cfg.seed = a.seed;
        cfg.target_infidelity = a.target;
        cfg.validate()?;
        configs.push(cfg);
    }
    let mut found = Vec::new();
    for cfg in &configs {
        match search(cfg) {
            Ok(sol) if sol.status.is_success() => {
                log::info!(
                    "tau_G = {:e}: N = {}, eps = {:.3e}",
                    cfg.gate_time,
                    sol.n_sdks,
                    sol.infidelity
                );
                found.push((cfg.gate_time, sol));
            }
            Ok(sol) => log::info!(
                "tau_G = {:e}: no solution below target (best {:.3e})",
                cfg.gate_time,
                sol.infidelity
            ),
            Err(Error::SearchFailed(msg)) => log::info!("tau_G = {:e}: {msg}", cfg.gate_time),
            Err(e) => return Err(e.into()),
        }
    }
    let sols: Vec<GateSolution> = found.iter().map(|(_, s)| s.clone()).collect();
    let scaled = universal_rescale(&sols, a.mode.into())?;
    let mut body =
        String::from("gate_time_target,gate_time,n_sdks,infidelity,scaled_sdks,scaled_time\n");
    for ((tau, s), p) in found.iter().zip(&scaled) {
        let _ = writeln!(
            body,
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            tau, s.gate_time, s.n_sdks, s.infidelity, p.scaled_sdks, p.scaled_time
        );
    }
    let config = serde_json::json!({ "grid": grid, "mode": format!("{:?}", a.mode).to_lowercase(), "searches": configs });
    let manifest = mb.finish(config, vec![a.seed]);
    let tags = format!(
        "pair={} mode={}",
        trap.pair_name(),
        format!("{:?}", a.mode).to_lowercase()
    );
    write_csv(&a.out, PARETO_SCHEMA, &tags, &body, &manifest)?;
    println!(
        "wrote {} frontier points to {}",
        found.len(),
        a.out.display()
    );
    Ok(if found.is_empty() {
        EXIT_BEST_EFFORT
    } else {
        EXIT_OK
    })
}

pub fn oracle_check(a: OracleCheckArgs) -> CliResult<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let traps: Vec<TrapSetup> = BUILTIN_PAIRS
        .iter()
        .map(|p| TrapSetup::builtin_pair(p))
        .collect::<Result<_, _>>()?;
    let (mut worst_beta, mut worst_theta) = (0.0f64, 0.0f64);
    for _ in 0..a.samples {
        let trap = &traps[rng.random_range(0..traps.len())];
        let modes = normal_modes(trap)?;
        let n = rng.random_range(1..=a.nmax.max(1)) as usize;
        let kicks: Vec<(f64, i32)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(0.0..2e-6),
                    if rng.random_bool(0.5) { 1 } else { -1 },
                )
            })
            .collect();
        let seq = PulseSequence::from_unsorted(kicks)?;
        let sol = GateSolution::evaluate(trap, seq, vec![1.0, 1.0], PhaseTarget::Plus)?;
        let st = propagate_branches(&sol.sequence, &modes, [Complex::new(0.0, 0.0); 2]);
        let (bp, bm) = (st.beta_plus(), st.beta_minus());
        for (x, y) in sol
            .beta_plus
            .iter()
            .zip(&bp)
            .chain(sol.beta_minus.iter().zip(&bm))
        {
            worst_beta = worst_beta.max((x - y).norm());
        }
        worst_theta = worst_theta.max(wrap_phase(st.entangling_phase() - sol.theta).abs());
    }
    println!(
        "{} sequences: max |dbeta| = {worst_beta:.3e}, max |dtheta| = {worst_theta:.3e}",
        a.samples
    );
    let ok = worst_beta <= 1e-10 && worst_theta <= 1e-10;
    if !ok {
        eprintln!("error: analytic dynamics disagree with the oracle");
    }
    let _ = std::io::stdout().flush();
    Ok(if ok { EXIT_OK } else { EXIT_DATA })
}
