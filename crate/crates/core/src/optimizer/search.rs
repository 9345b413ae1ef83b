use log::{debug, info};
use rayon::prelude::*;

use super::config::SearchConfig;
use super::stage1::{stage1_search, Stage1Candidate};
use super::stage2::stage2_refine;
use crate::error::{Error, Result};
use crate::gate_dynamics::{GateSolution, SolutionStatus};

fn stage1_key(s: &GateSolution) -> &[i32] {
    s.search_meta
        .as_ref()
        .map_or(&[], |m| m.stage1_groups.as_slice())
}

/// Order by ε, then fewest SDKs, shortest span, and lexicographic stage-1 groups.
pub fn rank_solutions(solutions: &mut [GateSolution]) {
    solutions.sort_by(|a, b| {
        a.infidelity
            .total_cmp(&b.infidelity)
            .then(a.n_sdks.cmp(&b.n_sdks))
            .then(a.gate_time.total_cmp(&b.gate_time))
            .then_with(|| stage1_key(a).cmp(stage1_key(b)))
            .then_with(|| a.sequence.directions().cmp(b.sequence.directions()))
    });
}

/// Stage 1 and stage 2 at the single SDK cap `config.n_max`; refined solutions ranked best first.
pub fn search_level(config: &SearchConfig) -> Result<Vec<GateSolution>> {
    let mut candidates: Vec<Stage1Candidate> = stage1_search(config)?;
    if let Some(cap) = config.max_refine {
        candidates.truncate(cap.max(1));
    }
    let n = candidates.len();
    let mut sols: Vec<GateSolution> = candidates
        .par_iter()
        .map(|c| {
            let mut s = stage2_refine(&c.groups, config)?;
            if let Some(m) = s.search_meta.as_mut() {
                m.stage1_cost = c.cost;
                m.candidates_refined = n;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    rank_solutions(&mut sols);
    Ok(sols)
}

/// Iterate 𝒩_max from `n_max_start` to the `n_max` ceiling; return the best solution of the
/// first level reaching the target, otherwise the best overall marked best-effort.
pub fn search(config: &SearchConfig) -> Result<GateSolution> {
    config.validate()?;
    let mut best: Option<GateSolution> = None;
    for level in config.n_max_start..=config.n_max {
        let mut cfg = config.clone();
        cfg.n_max = level;
        let sols = match search_level(&cfg) {
            Ok(s) => s,
            Err(Error::SearchFailed(msg)) => {
                debug!("N_max = {level}: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let top = &sols[0];
        info!(
            "N_max = {level}: {} candidates, best eps = {:.3e} with N = {} over {:.1} ns",
            sols.len(),
            top.infidelity,
            top.n_sdks,
            top.gate_time * 1e9
        );
        if top.infidelity <= config.target_infidelity {
            let mut sol = top.clone();
            if !sol.status.is_success() {
                sol.status = SolutionStatus::TargetMet;
            }
            return Ok(sol);
        }
        if best.as_ref().is_none_or(|b| top.infidelity < b.infidelity) {
            best = Some(top.clone());
        }
    }
    match best {
        Some(mut b) => {
            b.status = SolutionStatus::BestEffort;
            Ok(b)
        }
        None => Err(Error::SearchFailed(format!(
            "no candidates for any N_max in {}..={}",
            config.n_max_start, config.n_max
        ))),
    }
}
