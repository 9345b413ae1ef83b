use super::bfgs::{minimize, BfgsOptions, Bounds};
use super::config::SearchConfig;
use super::stage1::GroupVector;
use crate::error::{usage, Result};
use crate::gate_dynamics::{
    phase_error, GateSolution, GroupRecord, PulseSequence, SearchMeta, SolutionStatus,
};
use crate::ion_physics::{normal_modes, NormalModes};

/// Each nonzero group becomes |z| unit kicks of sign sgn(z), `min_separation` apart and
/// centred on the group time. Overlapping groups are merged in time order.
pub fn expand_groups(gv: &GroupVector, min_separation: f64) -> PulseSequence {
    let mut kicks = Vec::with_capacity(gv.n_sdks() as usize);
    for (&z, &t) in gv.z.iter().zip(&gv.group_times) {
        let n = z.unsigned_abs() as usize;
        for j in 0..n {
            kicks.push((
                t + (j as f64 - (n as f64 - 1.0) / 2.0) * min_separation,
                z.signum(),
            ));
        }
    }
    PulseSequence::from_unsorted(kicks).expect("finite group times")
}

/// 1 − tanh(y) without cancellation for large y.
fn one_minus_tanh(y: f64) -> f64 {
    if y > 0.0 {
        let e = (-2.0 * y).exp();
        2.0 * e / (1.0 + e)
    } else {
        1.0 - y.tanh()
    }
}

/// Stage-2 cost of a frozen group composition as a function of group centre times.
#[derive(Clone, Debug)]
pub struct Stage2Model {
    amplitudes: Vec<i32>,
    /// Kick offsets from the group centre and the group each kick belongs to.
    offsets: Vec<f64>,
    owner: Vec<usize>,
    signs: Vec<f64>,
    half_extent: Vec<f64>,
    modes: NormalModes,
    phase_coupling: [f64; 2],
    motional_weight: [f64; 2],
    /// Time unit of the optimization variables, 1/ω_ip.
    time_unit: f64,
    config: SearchConfig,
}

impl Stage2Model {
    /// Model over the nonzero groups of `gv`.
    pub fn new(gv: &GroupVector, config: &SearchConfig) -> Result<Self> {
        config.validate()?;
        if gv.z.len() != gv.group_times.len() {
            return Err(usage("group vector and group times differ in length"));
        }
        let modes = normal_modes::<f64>(&config.trap)?;
        let amplitudes: Vec<i32> = gv.z.iter().copied().filter(|&z| z != 0).collect();
        let sep = config.min_separation;
        let (mut offsets, mut owner, mut signs) = (Vec::new(), Vec::new(), Vec::new());
        for (k, &z) in amplitudes.iter().enumerate() {
            let n = z.unsigned_abs() as usize;
            for j in 0..n {
                offsets.push((j as f64 - (n as f64 - 1.0) / 2.0) * sep);
                owner.push(k);
                signs.push(z.signum() as f64);
            }
        }
        let half_extent = amplitudes
            .iter()
            .map(|z| (z.unsigned_abs() as f64 - 1.0) / 2.0 * sep)
            .collect();
        let motional_weight = [0, 1].map(|a| {
            let s = (modes.b[a][0] * modes.eta[a][0]).powi(2)
                + (modes.b[a][1] * modes.eta[a][1]).powi(2);
            2.0 / 3.0 * (config.nbar[a] + 0.5) * 8.0 * s
        });
        Ok(Self {
            amplitudes,
            offsets,
            owner,
            signs,
            half_extent,
            phase_coupling: [modes.phase_coupling(0), modes.phase_coupling(1)],
            time_unit: 1.0 / modes.omega_ip(),
            modes,
            motional_weight,
            config: config.clone(),
        })
    }

    pub fn n_vars(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn time_unit(&self) -> f64 {
        self.time_unit
    }

    /// Centre times (s) of the nonzero groups of `gv`.
    pub fn centres_of(gv: &GroupVector) -> Vec<f64> {
        gv.z.iter()
            .zip(&gv.group_times)
            .filter(|(z, _)| **z != 0)
            .map(|(_, &t)| t)
            .collect()
    }

    fn kick_times(&self, centres: &[f64]) -> Vec<f64> {
        self.offsets
            .iter()
            .zip(&self.owner)
            .map(|(o, &k)| centres[k] + o)
            .collect()
    }

    /// ε of the expanded sequence with centres in seconds; fills ∂ε/∂centre when asked.
    pub fn infidelity(&self, centres: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let t = self.kick_times(centres);
        let n = t.len();
        let mut theta = 0.0;
        let mut dtheta = vec![0.0; n];
        let mut sums = [(0.0, 0.0); 2];
        let mut trig = [vec![(0.0, 0.0); n], vec![(0.0, 0.0); n]];
        for a in 0..2 {
            let w = self.modes.omega[a];
            for i in 0..n {
                trig[a][i] = (w * t[i]).sin_cos();
            }
            let ca = 8.0 * self.phase_coupling[a];
            for i in 0..n {
                let (si, ci) = trig[a][i];
                sums[a].0 += self.signs[i] * ci;
                sums[a].1 += self.signs[i] * si;
                for j in 0..i {
                    let (sj, cj) = trig[a][j];
                    let zz = self.signs[i] * self.signs[j];
                    // sin(ω(tᵢ − tⱼ)) and cos(ω(tᵢ − tⱼ)) from per-kick phases.
                    let sd = si * cj - ci * sj;
                    let cd = ci * cj + si * sj;
                    let sgn = if t[i] > t[j] {
                        1.0
                    } else if t[i] < t[j] {
                        -1.0
                    } else {
                        0.0
                    };
                    theta += ca * zz * sgn * sd;
                    let d = ca * zz * sgn * w * cd;
                    dtheta[i] += d;
                    dtheta[j] -= d;
                }
            }
        }
        let dphi = phase_error(theta, self.config.phase_target);
        let mut eps = 2.0 / 3.0 * dphi * dphi;
        for a in 0..2 {
            eps += self.motional_weight[a] * (sums[a].0.powi(2) + sums[a].1.powi(2));
        }
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                let mut gi = 4.0 / 3.0 * dphi * dtheta[i];
                for a in 0..2 {
                    let w = self.modes.omega[a];
                    let (si, ci) = trig[a][i];
                    // ∂|S|²/∂tᵢ = 2 zᵢ ω (−Re S·sin ωtᵢ + Im S·cos ωtᵢ)
                    gi += self.motional_weight[a]
                        * 2.0
                        * self.signs[i]
                        * w
                        * (-sums[a].0 * si + sums[a].1 * ci);
                }
                g[self.owner[i]] += gi;
            }
        }
        eps
    }

    /// Σ_{k≠k'} c₁(tanh(−c₂ g) + 1) over nearest-pulse gaps g; gradient w.r.t. centres (s).
    pub fn overlap_penalty(&self, centres: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let c1 = self.config.penalty_c1_stage2;
        let c2 = self.config.penalty_c2_stage2;
        let m = centres.len();
        let mut total = 0.0;
        let mut g = grad;
        for k in 0..m {
            for l in (k + 1)..m {
                let d = centres[k] - centres[l];
                let gap = d.abs() - self.half_extent[k] - self.half_extent[l];
                let f = one_minus_tanh(c2 * gap);
                total += 2.0 * c1 * f;
                if let Some(g) = g.as_deref_mut() {
                    let dg = -2.0 * c1 * c2 * f * (2.0 - f) * d.signum();
                    g[k] += dg;
                    g[l] -= dg;
                }
            }
        }
        total
    }

    /// J2 with centres in seconds.
    pub fn cost(&self, centres: &[f64]) -> f64 {
        self.infidelity(centres, None) + self.overlap_penalty(centres, None)
    }

    /// J2 with centres in units of 1/ω_ip and the matching gradient.
    fn scaled_cost(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let centres: Vec<f64> = x.iter().map(|v| v * self.time_unit).collect();
        let eps = self.infidelity(&centres, Some(grad));
        let mut pg = vec![0.0; x.len()];
        let pen = self.overlap_penalty(&centres, Some(&mut pg));
        for (g, p) in grad.iter_mut().zip(&pg) {
            *g = (*g + p) * self.time_unit;
        }
        eps + pen
    }
}

/// J2 for group centre times `times` (one per group of `gv`; zero groups are ignored).
pub fn cost_stage2(times: &[f64], gv: &GroupVector, config: &SearchConfig) -> Result<f64> {
    if times.len() != gv.z.len() {
        return Err(usage("need one time per group"));
    }
    let moved = GroupVector {
        z: gv.z.clone(),
        group_times: times.to_vec(),
    };
    let model = Stage2Model::new(&moved, config)?;
    Ok(model.cost(&Stage2Model::centres_of(&moved)))
}

/// Locally refine the centre times of a stage-1 candidate and evaluate the result.
///
/// Centres are confined to a window of length max(τ_G, initial span) around the initial
/// configuration, so the realized gate time never exceeds the requested one. The returned
/// timings are the best iterate, never worse in J2 than the starting uniform grid.
pub fn stage2_refine(candidate: &GroupVector, config: &SearchConfig) -> Result<GateSolution> {
    let model = Stage2Model::new(candidate, config)?;
    if model.n_vars() == 0 {
        return Err(usage("candidate has no kicks"));
    }
    let init = Stage2Model::centres_of(candidate);
    let h = &model.half_extent;
    let first = init
        .iter()
        .zip(h)
        .map(|(c, h)| c - h)
        .fold(f64::INFINITY, f64::min);
    let last = init
        .iter()
        .zip(h)
        .map(|(c, h)| c + h)
        .fold(f64::NEG_INFINITY, f64::max);
    let window = config.gate_time.max(last - first);
    let mid = 0.5 * (first + last);
    let (lo, hi) = (mid - 0.5 * window, mid + 0.5 * window);
    let u = model.time_unit;
    let bounds = Bounds::new(
        h.iter().map(|h| (lo + h) / u).collect(),
        h.iter().map(|h| (hi - h) / u).collect(),
    );
    let x0: Vec<f64> = init.iter().map(|c| c / u).collect();
    let initial_cost = model.cost(&init);
    let opts = BfgsOptions {
        max_iter: config.max_iter_stage2,
        gtol: 1e-13,
        ftol: 1e-15,
        patience: 10,
        f_target: f64::NEG_INFINITY,
    };
    let report = minimize(|x, g| model.scaled_cost(x, g), &x0, Some(&bounds), &opts);
    let (centres, final_cost) = if report.f <= initial_cost {
        (
            report.x.iter().map(|x| x * u).collect::<Vec<_>>(),
            model.cost(&report.x.iter().map(|x| x * u).collect::<Vec<_>>()),
        )
    } else {
        (init.clone(), initial_cost)
    };

    let refined = GroupVector {
        z: model.amplitudes.clone(),
        group_times: centres.clone(),
    };
    let seq = expand_groups(&refined, config.min_separation);
    let t0 = seq.times().first().copied().unwrap_or(0.0);
    let seq = seq.shifted(-t0);
    let mut sol =
        GateSolution::evaluate(&config.trap, seq, config.nbar.to_vec(), config.phase_target)?;
    sol.groups = model
        .amplitudes
        .iter()
        .zip(&centres)
        .map(|(&amplitude, &c)| GroupRecord {
            center: c - t0,
            amplitude,
        })
        .collect();
    sol.groups.sort_by(|a, b| a.center.total_cmp(&b.center));
    let bandwidth_active = sol
        .sequence
        .times()
        .windows(2)
        .any(|w| w[1] - w[0] <= config.min_separation * (1.0 + 1e-9));
    sol.search_meta = Some(SearchMeta {
        seed: config.seed,
        n_max: config.n_max,
        ensemble_size: config.ensemble_size,
        n_groups: config.n_groups,
        stage1_groups: candidate.z.clone(),
        stage1_cost: f64::NAN,
        stage2_initial_cost: initial_cost,
        stage2_final_cost: final_cost,
        cost_history: report.history.clone(),
        stage2_converged: report.converged,
        bandwidth_active,
        candidates_refined: 1,
    });
    sol.status = sol.classify(config.target_infidelity, config.min_separation)?;
    if !sol.status.is_success() && !report.converged {
        sol.status = SolutionStatus::BestEffort;
    }
    Ok(sol)
}
