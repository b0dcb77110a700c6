//! Two-stage heuristic: per-window MCS from the coverage targets, then the
//! fewest TBs meeting `Q̂`, with an optional merge of adjacent windows.

use super::{AllocationProblem, AllocationSolution, HeuristicTrace, SolverKind};
use crate::channel::radio::{MAX_MCS, MIN_TX_MCS};
use crate::decode_prob::{CarryDistribution, WindowReception};
use crate::error::{Error, Result};
use crate::layers::LayerConfig;

/// Largest MCS in `1..=15` that at least `⌈U · t′⌉` users can decode.
pub fn solve_s1(user_mcs: &[u8], t_prime: f64) -> Result<Option<u8>> {
    if user_mcs.is_empty() {
        return Err(Error::InvalidParameter("S1 needs at least one user".into()));
    }
    let need = (user_mcs.len() as f64 * t_prime - 1e-9).ceil().max(0.0) as usize;
    Ok((1..=MAX_MCS).rev().find(|&m| user_mcs.iter().filter(|&&u| u >= m).count() >= need))
}

/// Smallest `N_ℓ ≤ n_hat` for which window `window` (1-based) is recovered
/// with probability `q_hat` when every TB is erased with probability
/// `p_hat`. `tbs` and `capacity` give the earlier windows; their entries at
/// and after `window` are ignored, except `capacity[window − 1]`.
pub fn solve_s2(
    layers: &LayerConfig,
    tbs: &[usize],
    capacity: &[usize],
    window: usize,
    p_hat: f64,
    q_hat: f64,
    n_hat: usize,
) -> Result<Option<usize>> {
    layers.check_window(window)?;
    let k = layers.sizes();
    let mut carry = CarryDistribution::start();
    for i in 0..window - 1 {
        carry = carry.advance(k[i], capacity[i], &WindowReception::new(tbs[i], p_hat));
    }
    let last = window - 1;
    Ok((0..=n_hat).find(|&n| {
        let p = carry.window_success(k[last], capacity[last], &WindowReception::new(n, p_hat));
        super::meets(p.clamp(0.0, 1.0), q_hat)
    }))
}

fn s2(problem: &AllocationProblem, mcs: &[u8], tbs: &[usize], window: usize) -> Option<usize> {
    if mcs[window - 1] < MIN_TX_MCS {
        return None;
    }
    let capacity: Vec<usize> = mcs.iter().map(|&m| problem.capacity(m)).collect();
    solve_s2(&problem.layers, tbs, &capacity, window, problem.p_hat(), problem.q_hat, problem.n_hat[window - 1])
        .ok()
        .flatten()
}

/// Runs the heuristic. Fails with [`Error::NoSolution`] when no number of
/// skipped leading windows yields a plan meeting the coverage targets.
pub fn heuristic_uep_ram(problem: &AllocationProblem) -> Result<AllocationSolution> {
    let l = problem.windows();
    let t_hat = problem.layers.coverage_targets();
    for s in (0..l).rev() {
        let mut mcs = vec![0u8; l];
        let mut tbs = vec![0usize; l];
        let mut t_prime = t_hat.to_vec();
        t_prime[s] = t_hat[0];
        for w in s..l {
            mcs[w] = solve_s1(&problem.user_mcs, t_prime[w])?.unwrap_or(0);
        }
        for w in s..l {
            if let Some(n) = s2(problem, &mcs, &tbs, w + 1) {
                tbs[w] = n;
            }
        }
        let intermediate = AllocationSolution::from_plan(problem, problem.plan(&mcs, &tbs)?, SolverKind::Heuristic);
        if !intermediate.feasible {
            log::debug!("skipping {s} windows: coverage not met");
            continue;
        }

        // Merge window ℓ−1 into window ℓ at the lower MCS.
        for w in (s + 1..l).rev() {
            if tbs[w - 1] > 0 && tbs[w] > 0 {
                let saved = (mcs[w - 1], tbs[w - 1], mcs[w], tbs[w]);
                mcs[w] = mcs[w - 1];
                tbs[w] = 0;
                tbs[w - 1] = 0;
                mcs[w - 1] = 0;
                match s2(problem, &mcs, &tbs, w + 1) {
                    Some(n) => tbs[w] = n,
                    None => (mcs[w - 1], tbs[w - 1], mcs[w], tbs[w]) = saved,
                }
            }
        }
        let refined = AllocationSolution::from_plan(problem, problem.plan(&mcs, &tbs)?, SolverKind::Heuristic);
        let trace = HeuristicTrace {
            intermediate: intermediate.plan.clone(),
            refined: refined.plan.clone(),
            refined_feasible: refined.feasible,
        };
        let keep_intermediate = intermediate.plan.total_tbs() < refined.plan.total_tbs() || !refined.feasible;
        let mut chosen = if keep_intermediate { intermediate } else { refined };
        chosen.skipped_windows = s;
        chosen.trace = Some(trace);
        return Ok(chosen);
    }
    Err(Error::NoSolution)
}
