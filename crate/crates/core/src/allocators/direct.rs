//! Reference solvers for the full allocation problem: exhaustive search
//! over `(m_ℓ, N_ℓ)` and a seeded genetic search for larger instances.
//!
//! Only reported MCS values of at least 4 are tried. Any other MCS can be
//! raised to the next reported value without losing a user, and a larger
//! TB never lowers a recovery probability, so the restriction keeps an
//! optimum.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{better, meets, AllocationProblem, AllocationSolution, SolverKind, COUNT_EPS};
use crate::decode_prob::{qos_indicators, window_probs_unchecked, CarryDistribution, WindowReception};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectMode {
    Exhaustive,
    Genetic,
    /// Exhaustive within the budget, genetic beyond it.
    #[default]
    Auto,
}

/// Treatment of unmet coverage targets during the genetic search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintHandling {
    /// Fitness `τ − penalty · violations`.
    #[default]
    Penalty,
    /// Infeasible individuals rank below every feasible one.
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneticConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub penalty: f64,
    pub elites: usize,
    pub handling: ConstraintHandling,
    pub seed: u64,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        Self {
            population: 60,
            generations: 200,
            tournament: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            penalty: 10.0,
            elites: 2,
            handling: ConstraintHandling::Penalty,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirectConfig {
    pub mode: DirectMode,
    /// Largest search space handled exhaustively.
    pub exhaustive_budget: u64,
    pub genetic: GeneticConfig,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self { mode: DirectMode::Auto, exhaustive_budget: 50_000_000, genetic: GeneticConfig::default() }
    }
}

/// Number of `(m, N)` combinations the exhaustive search ranges over.
pub fn search_space_size(problem: &AllocationProblem) -> u128 {
    let m = problem.candidate_mcs().len() as u128;
    problem.n_hat.iter().map(|&n| m * n as u128 + 1).product()
}

pub fn direct_uep_ram(problem: &AllocationProblem, config: &DirectConfig) -> Result<AllocationSolution> {
    let size = search_space_size(problem);
    match config.mode {
        DirectMode::Exhaustive if size > config.exhaustive_budget as u128 => {
            Err(Error::EnumerationTooLarge { needed: size, bound: config.exhaustive_budget as u128 })
        }
        DirectMode::Exhaustive => exhaustive_uep_ram(problem),
        DirectMode::Genetic => genetic_uep_ram(problem, &config.genetic),
        DirectMode::Auto if size <= config.exhaustive_budget as u128 => exhaustive_uep_ram(problem),
        DirectMode::Auto => genetic_uep_ram(problem, &config.genetic),
    }
}

struct Best {
    profit: usize,
    cost: usize,
    mcs: Vec<u8>,
    tbs: Vec<usize>,
}

impl Best {
    fn offer(slot: &mut Option<Best>, profit: usize, cost: usize, mcs: &[u8], tbs: &[usize]) {
        let wins = match slot {
            None => true,
            Some(b) => better((profit, cost, mcs, tbs), (b.profit, b.cost, &b.mcs, &b.tbs)),
        };
        if wins {
            *slot = Some(Best { profit, cost, mcs: mcs.to_vec(), tbs: tbs.to_vec() });
        }
    }
}

struct Search<'a> {
    problem: &'a AllocationProblem,
    k: &'a [usize],
    candidates: Vec<u8>,
    /// Reachable groups: report and size.
    groups: Vec<(u8, usize)>,
    required: Vec<f64>,
    rx: Vec<Vec<WindowReception>>,
    blocked: WindowReception,
    mcs: Vec<u8>,
    tbs: Vec<usize>,
    best: Option<Best>,
}

/// Users sharing the set of windows they receive share a carry.
struct Classes {
    carries: Vec<CarryDistribution>,
    of_group: Vec<usize>,
    /// Highest window (1-based) recovered with the target probability.
    level: Vec<usize>,
}

impl Search<'_> {
    fn levels_feasible(&self, level: &[usize]) -> Option<usize> {
        let mut profit = 0;
        for (l, &req) in self.required.iter().enumerate() {
            let count: usize = self.groups.iter().zip(level).filter(|(_, &lv)| lv > l).map(|(g, _)| g.1).sum();
            if (count as f64) < req - COUNT_EPS {
                return None;
            }
            profit += count;
        }
        Some(profit)
    }

    fn visit(&mut self, depth: usize, classes: &Classes, cost: usize) {
        let last = depth + 1 == self.k.len();
        if last {
            self.leaf(depth, classes, cost);
            return;
        }
        let options: Vec<(u8, usize)> = std::iter::once((0, 0))
            .chain(self.candidates.iter().flat_map(|&m| (1..=self.problem.n_hat[depth]).map(move |n| (m, n))))
            .collect();
        for (m, n) in options {
            let next = self.advance(depth, classes, m, n, true);
            self.mcs[depth] = m;
            self.tbs[depth] = n;
            self.visit(depth + 1, &next, cost + n);
        }
        self.mcs[depth] = 0;
        self.tbs[depth] = 0;
    }

    fn advance(&self, depth: usize, classes: &Classes, m: u8, n: usize, carry_on: bool) -> Classes {
        let cap = self.problem.capacity(m);
        let k = self.k[depth];
        let mut keys: Vec<(usize, bool)> = Vec::new();
        let mut carries = Vec::new();
        let mut success = Vec::new();
        let mut of_group = Vec::with_capacity(self.groups.len());
        let mut level = classes.level.clone();
        for (g, &(f, _)) in self.groups.iter().enumerate() {
            let key = (classes.of_group[g], n > 0 && f >= m);
            let idx = match keys.iter().position(|&k2| k2 == key) {
                Some(i) => i,
                None => {
                    let rx = if key.1 { &self.rx[depth][n] } else { &self.blocked };
                    let carry = &classes.carries[key.0];
                    success.push(meets(carry.window_success(k, cap, rx).clamp(0.0, 1.0), self.problem.q_hat));
                    if carry_on {
                        carries.push(carry.advance(k, cap, rx));
                    }
                    keys.push(key);
                    keys.len() - 1
                }
            };
            if success[idx] {
                level[g] = depth + 1;
            }
            of_group.push(idx);
        }
        Classes { carries, of_group, level }
    }

    fn leaf(&mut self, depth: usize, classes: &Classes, cost: usize) {
        // Nothing sent in the last window.
        if cost > 0 {
            if let Some(profit) = self.levels_feasible(&classes.level) {
                self.mcs[depth] = 0;
                self.tbs[depth] = 0;
                Best::offer(&mut self.best, profit, cost, &self.mcs, &self.tbs);
            }
        }
        let n_hat = self.problem.n_hat[depth];
        if n_hat == 0 {
            return;
        }
        let k = self.k[depth];
        // Per class, the fewest TBs meeting the target; it depends on the
        // capacity only, so it is shared by every MCS with that capacity.
        let q = self.problem.q_hat;
        for &m in &self.candidates.clone() {
            let cap = self.problem.capacity(m);
            let mut thresholds: Vec<Option<usize>> = Vec::with_capacity(classes.carries.len());
            for carry in &classes.carries {
                let ok = |n: usize| meets(carry.window_success(k, cap, &self.rx[depth][n]).clamp(0.0, 1.0), q);
                thresholds.push(if ok(n_hat) { Some(partition_point(1, n_hat, ok)) } else { None });
            }
            let mut steps: Vec<usize> = self
                .groups
                .iter()
                .enumerate()
                .filter(|(_, &(f, _))| f >= m)
                .filter_map(|(g, _)| thresholds[classes.of_group[g]])
                .collect();
            steps.sort_unstable();
            steps.dedup();
            for &n in &steps {
                let level: Vec<usize> = self
                    .groups
                    .iter()
                    .enumerate()
                    .map(|(g, &(f, _))| match thresholds[classes.of_group[g]] {
                        Some(t) if f >= m && t <= n => depth + 1,
                        _ => classes.level[g],
                    })
                    .collect();
                if let Some(profit) = self.levels_feasible(&level) {
                    self.mcs[depth] = m;
                    self.tbs[depth] = n;
                    Best::offer(&mut self.best, profit, cost + n, &self.mcs, &self.tbs);
                }
            }
        }
        self.mcs[depth] = 0;
        self.tbs[depth] = 0;
    }
}

/// Smallest `n` in `lo..=hi` with `ok(n)`, given `ok` is monotone and
/// `ok(hi)` holds.
fn partition_point(mut lo: usize, mut hi: usize, ok: impl Fn(usize) -> bool) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Exact optimum of the allocation problem under the allocator view.
pub fn exhaustive_uep_ram(problem: &AllocationProblem) -> Result<AllocationSolution> {
    let candidates = problem.candidate_mcs();
    let groups: Vec<(u8, usize)> = problem.groups().into_iter().filter(|&(f, _)| f >= super::MIN_TX_MCS).collect();
    let l = problem.windows();
    let rx =
        problem.n_hat.iter().map(|&nh| (0..=nh).map(|n| WindowReception::new(n, problem.p_hat())).collect()).collect();
    let mut search = Search {
        problem,
        k: problem.layers.sizes(),
        candidates,
        required: (1..=l).map(|lv| problem.required_users(lv)).collect(),
        rx,
        blocked: WindowReception::new(0, problem.p_hat()),
        mcs: vec![0; l],
        tbs: vec![0; l],
        best: None,
        groups,
    };
    let root = Classes {
        carries: vec![CarryDistribution::start()],
        of_group: vec![0; search.groups.len()],
        level: vec![0; search.groups.len()],
    };
    search.visit(0, &root, 0);
    let best = search.best.ok_or(Error::NoSolution)?;
    let sol = AllocationSolution::from_plan(problem, problem.plan(&best.mcs, &best.tbs)?, SolverKind::Exhaustive);
    if sol.profit() != best.profit || !sol.feasible {
        log::warn!("exhaustive optimum changed on re-evaluation: profit {} vs {}", sol.profit(), best.profit);
    }
    Ok(sol)
}

#[derive(Debug, Clone, Copy)]
struct Fitness {
    value: f64,
    profit: usize,
    cost: usize,
    feasible: bool,
}

struct Evaluator<'a> {
    problem: &'a AllocationProblem,
    groups: Vec<(u8, usize)>,
    cache: HashMap<Vec<(u8, usize)>, Fitness>,
}

impl Evaluator<'_> {
    fn fitness(&mut self, genes: &[(u8, usize)], config: &GeneticConfig) -> Fitness {
        if let Some(f) = self.cache.get(genes) {
            return *f;
        }
        let problem = self.problem;
        let mcs: Vec<u8> = genes.iter().map(|g| g.0).collect();
        let tbs: Vec<usize> = genes.iter().map(|g| g.1).collect();
        let capacity: Vec<usize> = mcs.iter().map(|&m| problem.capacity(m)).collect();
        let l = problem.windows();
        let mut counts = vec![0usize; l];
        for &(f, size) in &self.groups {
            let erasure: Vec<f64> =
                mcs.iter().zip(&tbs).map(|(&m, &n)| if n > 0 && m <= f { problem.p_hat() } else { 1.0 }).collect();
            let probs = window_probs_unchecked(problem.layers.sizes(), &tbs, &capacity, &erasure);
            for (c, d) in counts.iter_mut().zip(qos_indicators(&probs, problem.q_hat)) {
                *c += size * d as usize;
            }
        }
        let violations = (1..=l).filter(|&lv| (counts[lv - 1] as f64) < problem.required_users(lv) - COUNT_EPS).count();
        let profit: usize = counts.iter().sum();
        let cost: usize = tbs.iter().sum();
        let tau = if cost == 0 { 0.0 } else { profit as f64 / cost as f64 };
        let feasible = violations == 0 && cost > 0;
        let value = match (config.handling, feasible) {
            (_, true) => tau,
            (ConstraintHandling::Penalty, false) => tau - config.penalty * violations.max(1) as f64,
            (ConstraintHandling::Hard, false) => f64::MIN / 2.0 - violations as f64,
        };
        let f = Fitness { value, profit, cost, feasible };
        self.cache.insert(genes.to_vec(), f);
        f
    }
}

/// Seeded genetic search; returns the best feasible individual seen.
pub fn genetic_uep_ram(problem: &AllocationProblem, config: &GeneticConfig) -> Result<AllocationSolution> {
    if config.population == 0 || config.tournament == 0 {
        return Err(Error::InvalidParameter("genetic search needs a population and a tournament size".into()));
    }
    let l = problem.windows();
    let candidates = problem.candidate_mcs();
    if candidates.is_empty() {
        return Err(Error::NoSolution);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator {
        problem,
        groups: problem.groups().into_iter().filter(|&(f, _)| f >= super::MIN_TX_MCS).collect(),
        cache: HashMap::new(),
    };
    let random_gene = |rng: &mut ChaCha8Rng, w: usize| -> (u8, usize) {
        let n = rng.random_range(0..=problem.n_hat[w]);
        let m = candidates[rng.random_range(0..candidates.len())];
        if n == 0 {
            (0, 0)
        } else {
            (m, n)
        }
    };
    let mut population: Vec<Vec<(u8, usize)>> =
        (0..config.population).map(|_| (0..l).map(|w| random_gene(&mut rng, w)).collect()).collect();
    let mut best: Option<Best> = None;
    for generation in 0..=config.generations {
        let scores: Vec<Fitness> = population.iter().map(|ind| eval.fitness(ind, config)).collect();
        for (ind, f) in population.iter().zip(&scores) {
            if f.feasible {
                let mcs: Vec<u8> = ind.iter().map(|g| g.0).collect();
                let tbs: Vec<usize> = ind.iter().map(|g| g.1).collect();
                Best::offer(&mut best, f.profit, f.cost, &mcs, &tbs);
            }
        }
        if generation == config.generations {
            break;
        }
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[b].value.total_cmp(&scores[a].value).then(a.cmp(&b)));
        let mut next: Vec<Vec<(u8, usize)>> =
            order.iter().take(config.elites.min(population.len())).map(|&i| population[i].clone()).collect();
        let pick = |rng: &mut ChaCha8Rng| -> usize {
            (0..config.tournament)
                .map(|_| rng.random_range(0..population.len()))
                .max_by(|&a, &b| scores[a].value.total_cmp(&scores[b].value).then(b.cmp(&a)))
                .unwrap_or(0)
        };
        while next.len() < config.population {
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            let mut child = population[a].clone();
            if rng.random_bool(config.crossover_rate.clamp(0.0, 1.0)) {
                for (w, gene) in child.iter_mut().enumerate() {
                    if rng.random_bool(0.5) {
                        *gene = population[b][w];
                    }
                }
            }
            for (w, gene) in child.iter_mut().enumerate() {
                if rng.random_bool(config.mutation_rate.clamp(0.0, 1.0)) {
                    *gene = random_gene(&mut rng, w);
                }
            }
            next.push(child);
        }
        population = next;
    }
    let best = best.ok_or(Error::NoSolution)?;
    Ok(AllocationSolution::from_plan(problem, problem.plan(&best.mcs, &best.tbs)?, SolverKind::Genetic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocators::tests::problem;
    use crate::allocators::{check_feasibility, heuristic_uep_ram};
    use crate::layers::TransmissionPlan;

    // Every (m, N) per window, evaluated through the public path.
    fn enumerate_all(p: &AllocationProblem) -> Option<(usize, usize)> {
        let l = p.windows();
        let mut best: Option<Best> = None;
        let mut options: Vec<Vec<(u8, usize)>> = Vec::new();
        for w in 0..l {
            let mut o = vec![(0u8, 0usize)];
            for m in 4..=15u8 {
                for n in 1..=p.n_hat[w] {
                    o.push((m, n));
                }
            }
            options.push(o);
        }
        let mut idx = vec![0usize; l];
        loop {
            let mcs: Vec<u8> = (0..l).map(|w| options[w][idx[w]].0).collect();
            let tbs: Vec<usize> = (0..l).map(|w| options[w][idx[w]].1).collect();
            let plan: TransmissionPlan = p.plan(&mcs, &tbs).unwrap();
            let sol = AllocationSolution::from_plan(p, plan, SolverKind::Exhaustive);
            if sol.feasible {
                Best::offer(&mut best, sol.profit(), sol.plan.total_tbs(), &mcs, &tbs);
            }
            let mut w = 0;
            loop {
                if w == l {
                    return best.map(|b| (b.profit, b.cost));
                }
                idx[w] += 1;
                if idx[w] < options[w].len() {
                    break;
                }
                idx[w] = 0;
                w += 1;
            }
        }
    }

    #[test]
    fn single_window_two_users_matches_enumeration() {
        let p = problem(&[5], &[0.5], &[6, 11]);
        let sol = exhaustive_uep_ram(&p).unwrap();
        let (profit, cost) = enumerate_all(&p).unwrap();
        assert_eq!((sol.profit(), sol.plan.total_tbs()), (profit, cost));
        assert!(sol.feasible);
    }

    #[test]
    fn matches_unrestricted_enumeration() {
        let cases: [(&[usize], &[f64], &[u8]); 4] = [
            (&[2, 3], &[0.99, 0.5], &[5, 9, 9, 12, 4, 15]),
            (&[3, 2], &[0.7, 0.3], &[3, 8, 13, 6]),
            (&[1, 4], &[1.0, 0.2], &[7, 7, 10]),
            (&[4, 4], &[0.5, 0.5], &[2, 14, 9, 9, 11]),
        ];
        for (k, t, users) in cases {
            let p = problem(k, t, users);
            let expected = enumerate_all(&p);
            match exhaustive_uep_ram(&p) {
                Ok(sol) => {
                    let (profit, cost) = expected.expect("enumeration found nothing");
                    assert_eq!(sol.profit() * cost, profit * sol.plan.total_tbs(), "{k:?} {users:?}");
                    assert_eq!(sol.plan.total_tbs(), cost);
                }
                Err(Error::NoSolution) => assert!(expected.is_none()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn dominates_heuristic() {
        let users: Vec<u8> = (0..30).map(|i| 15 - (i / 3) as u8).collect();
        let p = problem(&[2, 5, 9], &[0.99, 0.8, 0.6], &users);
        let h = heuristic_uep_ram(&p).unwrap();
        let d = exhaustive_uep_ram(&p).unwrap();
        assert!(d.feasible && check_feasibility(&p, &d).feasible);
        assert!(d.tau >= h.tau - 1e-12, "{} < {}", d.tau, h.tau);
    }

    #[test]
    fn genetic_is_seeded_and_feasible() {
        let users: Vec<u8> = (0..30).map(|i| 15 - (i / 3) as u8).collect();
        let p = problem(&[2, 5, 9], &[0.99, 0.8, 0.6], &users);
        let cfg = GeneticConfig { generations: 40, ..GeneticConfig::default() };
        let a = genetic_uep_ram(&p, &cfg).unwrap();
        let b = genetic_uep_ram(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.feasible && check_feasibility(&p, &a).feasible);
        let hard = genetic_uep_ram(&p, &GeneticConfig { handling: ConstraintHandling::Hard, ..cfg }).unwrap();
        assert!(hard.feasible);
        let exact = exhaustive_uep_ram(&p).unwrap();
        assert!(exact.tau >= a.tau - 1e-12);
    }

    #[test]
    fn auto_mode_respects_budget() {
        let p = problem(&[2, 5], &[0.9, 0.5], &[5, 9, 12]);
        assert_eq!(search_space_size(&p), (3 * p.n_hat[0] as u128 + 1) * (3 * p.n_hat[1] as u128 + 1));
        let cfg = DirectConfig { mode: DirectMode::Exhaustive, exhaustive_budget: 10, ..DirectConfig::default() };
        assert!(matches!(direct_uep_ram(&p, &cfg), Err(Error::EnumerationTooLarge { .. })));
        let auto = DirectConfig { mode: DirectMode::Auto, exhaustive_budget: 10, ..DirectConfig::default() };
        assert_eq!(direct_uep_ram(&p, &auto).unwrap().solver, SolverKind::Genetic);
        assert_eq!(direct_uep_ram(&p, &DirectConfig::default()).unwrap().solver, SolverKind::Exhaustive);
    }
}
