use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bfgs::{minimize, BfgsOptions};
use super::config::{J1Form, SearchConfig};
use crate::error::{Error, Result};
use crate::gate_dynamics::phase_error;
use crate::ion_physics::normal_modes;

/// Signed SDK counts on a uniform grid of group times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupVector {
    pub z: Vec<i32>,
    /// Group times tₘ = τ_G·m/N, m = 1…N (s).
    pub group_times: Vec<f64>,
}

impl GroupVector {
    pub fn uniform(z: Vec<i32>, gate_time: f64) -> Self {
        let n = z.len();
        let group_times = (1..=n).map(|m| gate_time * m as f64 / n as f64).collect();
        Self { z, group_times }
    }

    pub fn n_sdks(&self) -> u32 {
        self.z.iter().map(|z| z.unsigned_abs()).sum()
    }

    pub fn max_amplitude(&self) -> u32 {
        self.z.iter().map(|z| z.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Precomputed stage-1 quantities for a fixed group grid: each group acts as co-located kicks.
#[derive(Clone, Debug)]
pub struct GroupModel {
    pub times: Vec<f64>,
    /// Θ = ½ zᵀ M z.
    phase_matrix: Vec<f64>,
    /// cos(ω_α tₘ), sin(ω_α tₘ) per mode.
    trig: [(Vec<f64>, Vec<f64>); 2],
    /// ε_motional = Σ_α w_α |S_α|².
    motional_weight: [f64; 2],
    config: SearchConfig,
}

impl GroupModel {
    pub fn new(config: &SearchConfig) -> Result<Self> {
        config.validate()?;
        let modes = normal_modes::<f64>(&config.trap)?;
        let n = config.n_groups;
        let times: Vec<f64> = (1..=n)
            .map(|m| config.gate_time * m as f64 / n as f64)
            .collect();
        let mut phase_matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let dt = (times[i] - times[j]).abs();
                    phase_matrix[i * n + j] = (0..2)
                        .map(|a| 8.0 * modes.phase_coupling(a) * (modes.omega[a] * dt).sin())
                        .sum();
                }
            }
        }
        let trig = [0, 1].map(|a| {
            times
                .iter()
                .map(|&t| (modes.omega[a] * t).sin_cos())
                .map(|(s, c)| (c, s))
                .unzip()
        });
        let motional_weight = [0, 1].map(|a| {
            let s = (modes.b[a][0] * modes.eta[a][0]).powi(2)
                + (modes.b[a][1] * modes.eta[a][1]).powi(2);
            2.0 / 3.0 * (config.nbar[a] + 0.5) * 8.0 * s
        });
        Ok(Self {
            times,
            phase_matrix,
            trig,
            motional_weight,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    /// Grid-model ε and Θ; fills ∂ε/∂z when `grad` is given.
    pub fn infidelity(&self, z: &[f64], grad: Option<&mut [f64]>) -> (f64, f64) {
        let n = self.times.len();
        let mz: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.phase_matrix[i * n + j] * z[j]).sum())
            .collect();
        let theta = 0.5 * z.iter().zip(&mz).map(|(a, b)| a * b).sum::<f64>();
        let dphi = phase_error(theta, self.config.phase_target);
        let mut eps = 2.0 / 3.0 * dphi * dphi;
        let mut sums = [(0.0, 0.0); 2];
        for a in 0..2 {
            let (c, s) = &self.trig[a];
            let re: f64 = z.iter().zip(c).map(|(z, c)| z * c).sum();
            let im: f64 = z.iter().zip(s).map(|(z, s)| z * s).sum();
            sums[a] = (re, im);
            eps += self.motional_weight[a] * (re * re + im * im);
        }
        if let Some(g) = grad {
            for i in 0..n {
                let mut gi = 4.0 / 3.0 * dphi * mz[i];
                for a in 0..2 {
                    let (c, s) = &self.trig[a];
                    gi += self.motional_weight[a] * 2.0 * (sums[a].0 * c[i] + sums[a].1 * s[i]);
                }
                g[i] = gi;
            }
        }
        (eps, theta)
    }

    fn count_penalty(&self, count: f64) -> (f64, f64) {
        self.count_penalty_at(count, self.config.n_max as f64 + 1.0)
    }

    fn count_penalty_at(&self, count: f64, cap: f64) -> (f64, f64) {
        let c1 = self.config.penalty_c1_stage1;
        let c2 = self.config.penalty_c2_stage1;
        let th = (c2 * (count - cap)).tanh();
        (c1 * (th + 1.0), c1 * c2 * (1.0 - th * th))
    }

    fn combine(&self, eps: f64, pen: f64) -> f64 {
        match self.config.j1_form {
            J1Form::Additive => eps + pen,
            J1Form::Multiplicative => eps * pen,
        }
    }
}

/// J1 for a real-relaxed group vector, using the smoothed count Σ√(z² + δ²).
pub fn cost_stage1(z: &[f64], config: &SearchConfig) -> Result<f64> {
    let model = GroupModel::new(config)?;
    if z.len() != config.n_groups {
        return Err(crate::error::usage(
            "group vector length must equal n_groups",
        ));
    }
    Ok(cost_stage1_with_gradient(&model, z, None))
}

pub fn cost_stage1_with_gradient(model: &GroupModel, z: &[f64], grad: Option<&mut [f64]>) -> f64 {
    relaxed_cost(model, z, grad, model.config.n_max as f64 + 1.0)
}

/// Relaxed J1 with the penalty ramp centred on `cap` instead of 𝒩_max + 1.
fn relaxed_cost(model: &GroupModel, z: &[f64], grad: Option<&mut [f64]>, cap: f64) -> f64 {
    let delta = model.config.smoothing;
    let count: f64 = z.iter().map(|z| (z * z + delta * delta).sqrt()).sum();
    let (pen, dpen) = model.count_penalty_at(count, cap);
    match grad {
        None => {
            let (eps, _) = model.infidelity(z, None);
            model.combine(eps, pen)
        }
        Some(g) => {
            let (eps, _) = model.infidelity(z, Some(&mut *g));
            for (gi, &zi) in g.iter_mut().zip(z) {
                let dcount = zi / (zi * zi + delta * delta).sqrt();
                *gi = match model.config.j1_form {
                    J1Form::Additive => *gi + dpen * dcount,
                    J1Form::Multiplicative => *gi * pen + eps * dpen * dcount,
                };
            }
            model.combine(eps, pen)
        }
    }
}

/// J1 of an integer group vector with the exact count Σ|z|.
pub fn integer_cost_stage1(model: &GroupModel, z: &[i32]) -> f64 {
    let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
    let (eps, _) = model.infidelity(&zf, None);
    let count: u32 = z.iter().map(|v| v.unsigned_abs()).sum();
    model.combine(eps, model.count_penalty(count as f64).0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage1Candidate {
    pub groups: GroupVector,
    /// Integer J1.
    pub cost: f64,
    /// Grid-model ε of the integer vector.
    pub infidelity: f64,
    /// Index of the first restart that produced this vector.
    pub restart: usize,
}

const POLISH_COORDS: usize = 8;

/// Best of the floor/ceil neighbours over the most ambiguous coordinates.
fn integerize(model: &GroupModel, z: &[f64]) -> Vec<i32> {
    let zmax = model.config.z_max as i32;
    let base: Vec<i32> = z
        .iter()
        .map(|v| (v.round() as i32).clamp(-zmax, zmax))
        .collect();
    let mut ambiguous: Vec<(usize, f64)> = z
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - v.round()).abs()))
        .filter(|&(_, d)| d > 1e-9)
        .collect();
    ambiguous.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ambiguous.truncate(POLISH_COORDS);
    let mut best = base.clone();
    let mut best_cost = integer_cost_stage1(model, &base);
    let mut trial = base.clone();
    for mask in 1u32..(1 << ambiguous.len()) {
        for (bit, &(i, _)) in ambiguous.iter().enumerate() {
            let alt = if z[i] > base[i] as f64 {
                base[i] + 1
            } else {
                base[i] - 1
            };
            trial[i] = if mask & (1 << bit) != 0 {
                alt.clamp(-zmax, zmax)
            } else {
                base[i]
            };
        }
        let c = integer_cost_stage1(model, &trial);
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(&trial);
        }
    }
    unit_move_polish(model, best)
}

/// Steepest descent over single-unit transfers and removals on the integer J1.
fn unit_move_polish(model: &GroupModel, mut z: Vec<i32>) -> Vec<i32> {
    let zmax = model.config.z_max as i32;
    let n = z.len();
    let mut cost = integer_cost_stage1(model, &z);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        let mut trial = z.clone();
        for i in 0..n {
            if z[i] == 0 {
                continue;
            }
            let s = z[i].signum();
            // j == n removes the unit instead of moving it.
            for j in 0..=n {
                if j == i || (j < n && (z[j] + s).abs() > zmax) {
                    continue;
                }
                trial[i] -= s;
                if j < n {
                    trial[j] += s;
                }
                let c = integer_cost_stage1(model, &trial);
                if c < cost && best.is_none_or(|b| c < b.0) {
                    best = Some((c, i, j));
                }
                trial[i] = z[i];
                if j < n {
                    trial[j] = z[j];
                }
            }
        }
        match best {
            Some((c, i, j)) => {
                let s = z[i].signum();
                z[i] -= s;
                if j < n {
                    z[j] += s;
                }
                cost = c;
            }
            None => return z,
        }
    }
}

fn canonical_sign(mut z: Vec<i32>) -> Vec<i32> {
    if z.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
        z.iter_mut().for_each(|v| *v = -*v);
    }
    z
}

/// RNG for one restart: ChaCha8 seeded by `seed` on stream (𝒩_max, restart).
pub(crate) fn restart_rng(seed: u64, n_max: u32, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n_max as u64) << 32) | restart as u64);
    rng
}

fn descend(model: &GroupModel, restart: usize) -> Vec<i32> {
    let cfg = &model.config;
    let zmax = cfg.z_max as f64;
    let mut rng = restart_rng(cfg.seed, cfg.n_max, restart);
    let u0: Vec<f64> = (0..cfg.n_groups)
        .map(|_| (rng.random_range(-zmax..=zmax) / zmax).asin())
        .collect();
    let mut zbuf = vec![0.0; cfg.n_groups];
    let mut gz = vec![0.0; cfg.n_groups];
    let opts = BfgsOptions {
        max_iter: cfg.max_iter_stage1,
        gtol: 1e-10,
        ftol: 1e-12,
        ..Default::default()
    };
    let target_cap = cfg.n_max as f64 + 1.0;
    let start_count: f64 = u0.iter().map(|u| (zmax * u.sin()).abs()).sum();
    // The tanh ramp is flat far above the cap, so the cap is lowered from the initial count
    // in halving steps before the final descent on the true J1.
    let mut excess = start_count - target_cap;
    let mut caps = Vec::new();
    while excess > 0.5 {
        caps.push(target_cap + excess);
        excess *= 0.5;
    }
    caps.push(target_cap);
    let mut u = u0;
    for cap in caps {
        let report = minimize(
            |u, g| {
                for (zi, ui) in zbuf.iter_mut().zip(u) {
                    *zi = zmax * ui.sin();
                }
                let f = relaxed_cost(model, &zbuf, Some(&mut gz), cap);
                for i in 0..u.len() {
                    g[i] = gz[i] * zmax * u[i].cos();
                }
                f
            },
            &u,
            None,
            &opts,
        );
        u = report.x;
    }
    let z: Vec<f64> = u.iter().map(|u| zmax * u.sin()).collect();
    canonical_sign(integerize(model, &z))
}

/// Random multistart descent on the relaxed J1, integerized and deduplicated.
///
/// Candidates with 0 < 𝒩 ≤ 𝒩_max are returned ordered by (integer J1, 𝒩, z).
pub fn stage1_search(config: &SearchConfig) -> Result<Vec<Stage1Candidate>> {
    let model = GroupModel::new(config)?;
    let raw: Vec<Vec<i32>> = (0..config.ensemble_size)
        .into_par_iter()
        .map(|r| descend(&model, r))
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut rejected = 0usize;
    for (restart, z) in raw.into_iter().enumerate() {
        let count: u32 = z.iter().map(|v| v.unsigned_abs()).sum();
        if count == 0 || count > config.n_max {
            rejected += 1;
            continue;
        }
        if !seen.insert(z.clone()) {
            continue;
        }
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        let (eps, _) = model.infidelity(&zf, None);
        let cost = integer_cost_stage1(&model, &z);
        out.push(Stage1Candidate {
            groups: GroupVector::uniform(z, config.gate_time),
            cost,
            infidelity: eps,
            restart,
        });
    }
    if out.is_empty() {
        return Err(Error::SearchFailed(format!(
            "no stage-1 candidate with 0 < N ≤ {} from {} restarts ({} rejected on SDK count)",
            config.n_max, config.ensemble_size, rejected
        )));
    }
    out.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.groups.n_sdks().cmp(&b.groups.n_sdks()))
            .then_with(|| a.groups.z.cmp(&b.groups.z))
    });
    Ok(out)
}
