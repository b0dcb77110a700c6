//! Multirate baseline: one uncoded layer per MCS, strictly increasing MCS
//! across layers, chosen to maximise the summed user performance level.

use super::{AllocationProblem, AllocationSolution, SolverKind};
use crate::channel::radio::{MAX_MCS, MIN_TX_MCS};
use crate::decode_prob::{mrt_recovery_probs, uncoded_tbs};
use crate::error::{Error, Result};

/// Summed `max_ℓ ρ_ℓ · Ṗ_{u,ℓ}` over users for one MCS vector.
fn objective(problem: &AllocationProblem, mcs: &[u8], capacity: &[usize]) -> f64 {
    let psnr = problem.layers.psnr();
    problem
        .groups()
        .into_iter()
        .map(|(f, size)| {
            let erasure: Vec<f64> = mcs.iter().map(|&m| super::allocator_erasure(f, m, problem.p_hat())).collect();
            let probs = mrt_recovery_probs(&problem.layers, capacity, &erasure);
            let best = psnr.iter().zip(&probs).map(|(r, p)| r * p).fold(0.0, f64::max);
            size as f64 * best
        })
        .sum()
}

fn next_increasing(v: &mut [u8]) -> bool {
    let l = v.len();
    for i in (0..l).rev() {
        // Position i can rise while leaving room for the entries after it.
        if (v[i] as usize) < MAX_MCS as usize - (l - 1 - i) {
            v[i] += 1;
            for j in i + 1..l {
                v[j] = v[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over strictly increasing MCS vectors in `4..=15`.
/// The first maximiser in lexicographic order is returned.
pub fn solve_mrt(problem: &AllocationProblem) -> Result<AllocationSolution> {
    let l = problem.windows();
    let slots = (MAX_MCS - MIN_TX_MCS + 1) as usize;
    if l > slots {
        return Err(Error::InvalidParameter(format!(
            "{l} layers cannot get strictly increasing MCS from {slots} values"
        )));
    }
    let mut mcs: Vec<u8> = (0..l as u8).map(|i| MIN_TX_MCS + i).collect();
    let mut best: Option<(f64, Vec<u8>)> = None;
    loop {
        let capacity: Vec<usize> = mcs.iter().map(|&m| problem.capacity(m)).collect();
        let value = objective(problem, &mcs, &capacity);
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, mcs.clone()));
        }
        if !next_increasing(&mut mcs) {
            break;
        }
    }
    let (value, mcs) = best.ok_or(Error::NoSolution)?;
    let capacity: Vec<usize> = mcs.iter().map(|&m| problem.capacity(m)).collect();
    let tbs = uncoded_tbs(&problem.layers, &capacity);
    let plan = problem.plan(&mcs, &tbs)?;
    let mut sol = AllocationSolution::from_plan(problem, plan, SolverKind::Mrt);
    sol.objective = value;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocators::tests::problem;

    #[test]
    fn increasing_vectors_are_all_visited() {
        let mut v = vec![4u8, 5, 6];
        let mut count = 1;
        while next_increasing(&mut v) {
            assert!(v.windows(2).all(|w| w[0] < w[1]) && v[2] <= 15);
            count += 1;
        }
        assert_eq!(count, 220);
        assert!(solve_mrt(&problem(&[1; 13], &[0.1; 13], &[5])).is_err());
    }

    #[test]
    fn single_layer_picks_the_best_rate() {
        let p = problem(&[6], &[0.5], &[5, 9, 9, 12]);
        let sol = solve_mrt(&p).unwrap();
        // Users 9, 9, 12 with larger TBs beat all four with smaller ones.
        let rho = p.layers.psnr()[0];
        let at = |m: u8| {
            let n = p.capacity(m);
            let tbs = 6usize.div_ceil(n) as i32;
            let users = p.user_mcs.iter().filter(|&&u| u >= m).count() as f64;
            users * rho * 0.9f64.powi(tbs)
        };
        let best = (4..=15u8).map(at).fold(0.0, f64::max);
        assert!((sol.objective - best).abs() < 1e-9);
        assert_eq!(sol.solver, SolverKind::Mrt);
    }

    #[test]
    fn two_layers_match_enumeration() {
        let p = problem(&[3, 5], &[0.9, 0.5], &[6, 8, 13]);
        let sol = solve_mrt(&p).unwrap();
        let mut best = (f64::MIN, vec![]);
        for a in 4..=15u8 {
            for b in a + 1..=15 {
                let cap = [p.capacity(a), p.capacity(b)];
                let v = objective(&p, &[a, b], &cap);
                if v > best.0 {
                    best = (v, vec![a, b]);
                }
            }
        }
        assert_eq!(sol.plan.mcs, best.1);
        assert!(sol.plan.mcs[0] < sol.plan.mcs[1]);
    }

    #[test]
    fn homogeneous_optimum_does_not_depend_on_user_count() {
        let a = solve_mrt(&problem(&[2, 7], &[0.9, 0.5], &[9; 3])).unwrap();
        let b = solve_mrt(&problem(&[2, 7], &[0.9, 0.5], &[9; 30])).unwrap();
        assert_eq!(a.plan, b.plan);
    }
}
