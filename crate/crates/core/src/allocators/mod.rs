//! MCS and TB-count allocation for layered multicast.
//!
//! All solvers work on an [`AllocationProblem`]: the message layout, the
//! CQI reports `m^(u)` of the users, the radio configuration, the recovery
//! target `Q̂` and the per-window TB budgets `N̂_ℓ`. Users are evaluated
//! under the allocator view of the erasure model, so users with the same
//! report are interchangeable and are handled as one group.

pub mod direct;
pub mod heuristic;
pub mod mrt;

use serde::{Deserialize, Serialize};

use crate::channel::link::{allocator_erasure, BlerModel, ErasureView, UserContext};
use crate::channel::radio::{RadioConfig, MAX_MCS, MIN_TX_MCS};
use crate::decode_prob::{meets_target, mrt_recovery_probs, qos_indicators, window_probs_unchecked};
use crate::error::{Error, Result};
use crate::layers::{LayerConfig, TransmissionPlan};

pub use direct::{
    direct_uep_ram, exhaustive_uep_ram, genetic_uep_ram, ConstraintHandling, DirectConfig, DirectMode, GeneticConfig,
};
pub use heuristic::{heuristic_uep_ram, solve_s1, solve_s2};
pub use mrt::solve_mrt;

// Absorbs rounding in `U · t̂_ℓ`.
const COUNT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    pub layers: LayerConfig,
    /// Reported MCS `m^(u)` of every user.
    pub user_mcs: Vec<u8>,
    pub radio: RadioConfig,
    pub q_hat: f64,
    /// TB budget `N̂_ℓ` per window.
    pub n_hat: Vec<usize>,
}

impl AllocationProblem {
    /// Problem with the budgets derived from `radio`.
    pub fn new(layers: LayerConfig, user_mcs: Vec<u8>, radio: RadioConfig, q_hat: f64) -> Result<Self> {
        let n_hat = layers.sizes().iter().map(|&k| radio.tb_budget(k)).collect();
        Self::with_budgets(layers, user_mcs, radio, q_hat, n_hat)
    }

    pub fn with_budgets(
        layers: LayerConfig,
        user_mcs: Vec<u8>,
        radio: RadioConfig,
        q_hat: f64,
        n_hat: Vec<usize>,
    ) -> Result<Self> {
        if user_mcs.is_empty() {
            return Err(Error::InvalidParameter("allocation needs at least one user".into()));
        }
        if let Some(&m) = user_mcs.iter().find(|&&m| !(1..=MAX_MCS).contains(&m)) {
            return Err(Error::McsOutOfRange(m));
        }
        if !(q_hat > 0.0 && q_hat <= 1.0) {
            return Err(Error::InvalidParameter(format!("target probability {q_hat} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&radio.p_hat) {
            return Err(Error::InvalidParameter(format!("p_hat {} outside [0, 1]", radio.p_hat)));
        }
        if n_hat.len() != layers.count() {
            return Err(Error::InvalidParameter(format!("{} budgets for {} windows", n_hat.len(), layers.count())));
        }
        Ok(Self { layers, user_mcs, radio, q_hat, n_hat })
    }

    pub fn users(&self) -> usize {
        self.user_mcs.len()
    }

    pub fn windows(&self) -> usize {
        self.layers.count()
    }

    pub fn p_hat(&self) -> f64 {
        self.radio.p_hat
    }

    /// Elements per TB at `mcs`, 0 for MCS indices that cannot be sent.
    pub fn capacity(&self, mcs: u8) -> usize {
        self.radio.capacity(mcs).unwrap_or(0)
    }

    /// Users that must reach level `ℓ` (1-based).
    pub fn required_users(&self, level: usize) -> f64 {
        self.users() as f64 * self.layers.coverage_targets()[level - 1]
    }

    /// Plan with capacities filled in; windows without TBs get MCS 0.
    pub fn plan(&self, mcs: &[u8], tbs: &[usize]) -> Result<TransmissionPlan> {
        let mcs: Vec<u8> = mcs.iter().zip(tbs).map(|(&m, &n)| if n == 0 { 0 } else { m }).collect();
        if let Some(&m) = mcs.iter().find(|&&m| m != 0 && m < MIN_TX_MCS) {
            return Err(Error::McsOutOfRange(m));
        }
        let capacity = mcs.iter().map(|&m| if m == 0 { 0 } else { self.capacity(m) }).collect();
        TransmissionPlan::new(mcs, tbs.to_vec(), capacity)
    }

    /// Distinct reports with their multiplicities, ascending.
    pub(crate) fn groups(&self) -> Vec<(u8, usize)> {
        let mut counts = [0usize; MAX_MCS as usize + 1];
        for &m in &self.user_mcs {
            counts[m as usize] += 1;
        }
        (1..=MAX_MCS).filter(|&m| counts[m as usize] > 0).map(|m| (m, counts[m as usize])).collect()
    }

    /// Transmittable MCS values worth trying: raising a window's MCS to the
    /// next reported value keeps its audience and enlarges its TBs.
    pub(crate) fn candidate_mcs(&self) -> Vec<u8> {
        self.groups().into_iter().map(|(m, _)| m).filter(|&m| m >= MIN_TX_MCS).collect()
    }

    pub(crate) fn allocator_erasures(&self, plan: &TransmissionPlan, feedback: u8) -> Vec<f64> {
        plan.mcs.iter().map(|&m| allocator_erasure(feedback, m, self.p_hat())).collect()
    }

    /// Per-window recovery probabilities of a user reporting `feedback`.
    pub fn user_window_probs(&self, plan: &TransmissionPlan, model: RecoveryModel, feedback: u8) -> Vec<f64> {
        recovery_probs(model, &self.layers, plan, &self.allocator_erasures(plan, feedback))
    }

    /// QoS indicators `δ_{u,ℓ}` of every user.
    pub fn delta(&self, plan: &TransmissionPlan, model: RecoveryModel) -> Vec<Vec<bool>> {
        let by_group: Vec<(u8, Vec<bool>)> = self
            .groups()
            .into_iter()
            .map(|(f, _)| (f, qos_indicators(&self.user_window_probs(plan, model, f), self.q_hat)))
            .collect();
        self.user_mcs
            .iter()
            .map(|m| by_group.iter().find(|(f, _)| f == m).map(|(_, d)| d.clone()).unwrap_or_default())
            .collect()
    }
}

/// How layers are recovered from a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryModel {
    /// Expanding-window network coding.
    Coded,
    /// Plain per-layer delivery: every TB of layers `1..=ℓ` must arrive.
    Uncoded,
}

/// Recovery probability of levels `1..=L` for one erasure vector.
pub fn recovery_probs(
    model: RecoveryModel,
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
) -> Vec<f64> {
    match model {
        RecoveryModel::Coded => window_probs_unchecked(layers.sizes(), &plan.tbs, &plan.capacity, erasure),
        RecoveryModel::Uncoded => mrt_recovery_probs(layers, &plan.capacity, erasure),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Heuristic,
    Exhaustive,
    Genetic,
    Mrt,
}

impl SolverKind {
    pub fn model(self) -> RecoveryModel {
        match self {
            SolverKind::Mrt => RecoveryModel::Uncoded,
            _ => RecoveryModel::Coded,
        }
    }
}

/// Intermediate and refined plans of the heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicTrace {
    pub intermediate: TransmissionPlan,
    pub refined: TransmissionPlan,
    pub refined_feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSolution {
    pub plan: TransmissionPlan,
    /// Recovered levels over all users per TB.
    pub tau: f64,
    /// Value the solver maximised: `tau` for UEP solvers, the summed
    /// user performance level for MrT.
    pub objective: f64,
    pub feasible: bool,
    /// `delta[u][ℓ]`.
    pub delta: Vec<Vec<bool>>,
    pub solver: SolverKind,
    /// Leading windows without transmissions.
    pub skipped_windows: usize,
    pub trace: Option<HeuristicTrace>,
}

impl AllocationSolution {
    /// Evaluates `plan` and wraps it with its QoS indicators.
    pub fn from_plan(problem: &AllocationProblem, plan: TransmissionPlan, solver: SolverKind) -> Self {
        let delta = problem.delta(&plan, solver.model());
        let report = coverage_report(problem, &plan, &delta, solver.model());
        let tau = tau_of(&delta, &plan);
        let skipped_windows = plan.tbs.iter().take_while(|&&n| n == 0).count();
        Self { plan, tau, objective: tau, feasible: report.feasible, delta, solver, skipped_windows, trace: None }
    }

    pub fn profit(&self) -> usize {
        self.delta.iter().map(|row| row.iter().filter(|d| **d).count()).sum()
    }
}

fn tau_of(delta: &[Vec<bool>], plan: &TransmissionPlan) -> f64 {
    crate::decode_prob::profit_cost_ratio(delta, &plan.tbs).unwrap_or(0.0)
}

/// Outcome of [`check_feasibility`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Fraction of users reaching each level.
    pub achieved: Vec<f64>,
    pub coverage_ok: Vec<bool>,
    pub budget_ok: Vec<bool>,
    pub feasible: bool,
}

/// Recomputes the QoS indicators of `solution` and checks the coverage
/// constraints and, for coded solutions, the TB budgets.
pub fn check_feasibility(problem: &AllocationProblem, solution: &AllocationSolution) -> FeasibilityReport {
    let model = solution.solver.model();
    let delta = problem.delta(&solution.plan, model);
    coverage_report(problem, &solution.plan, &delta, model)
}

fn coverage_report(
    problem: &AllocationProblem,
    plan: &TransmissionPlan,
    delta: &[Vec<bool>],
    model: RecoveryModel,
) -> FeasibilityReport {
    let l = problem.windows();
    let u = problem.users() as f64;
    let mut achieved = vec![0.0; l];
    let mut coverage_ok = vec![false; l];
    for level in 0..l {
        let count = delta.iter().filter(|d| d[level]).count() as f64;
        achieved[level] = count / u;
        coverage_ok[level] = count >= problem.required_users(level + 1) - COUNT_EPS;
    }
    let budget_ok: Vec<bool> = match model {
        RecoveryModel::Coded => plan.tbs.iter().zip(&problem.n_hat).map(|(n, b)| n <= b).collect(),
        RecoveryModel::Uncoded => vec![true; l],
    };
    let feasible =
        plan.total_tbs() > 0 && plan.layers() == l && coverage_ok.iter().all(|&b| b) && budget_ok.iter().all(|&b| b);
    FeasibilityReport { achieved, coverage_ok, budget_ok, feasible }
}

/// Per-user recovery under a chosen erasure view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserOutcome {
    /// Probability of recovering levels `1..=ℓ` through window `ℓ`
    /// (coded) or layers `1..=ℓ` (uncoded).
    pub probs: Vec<f64>,
    pub delta: Vec<bool>,
    /// `max_ℓ ρ_ℓ · P_ℓ`.
    pub psnr: f64,
}

/// Evaluates a solution for concrete users.
pub fn evaluate_users(
    layers: &LayerConfig,
    solution: &AllocationSolution,
    users: &[UserContext],
    view: ErasureView,
    bler: &BlerModel,
    q_hat: f64,
) -> Vec<UserOutcome> {
    let model = solution.solver.model();
    users
        .iter()
        .map(|u| {
            let erasure: Vec<f64> =
                solution.plan.mcs.iter().map(|&m| if m == 0 { 1.0 } else { u.erasure_prob(m, view, bler) }).collect();
            let probs = recovery_probs(model, layers, &solution.plan, &erasure);
            let delta = qos_indicators(&probs, q_hat);
            let psnr = layers.psnr().iter().zip(&probs).map(|(r, p)| r * p).fold(0.0, f64::max);
            UserOutcome { probs, delta, psnr }
        })
        .collect()
}

/// Fraction of users whose indicator for each level is set.
pub fn level_fractions(outcomes: &[UserOutcome], levels: usize) -> Vec<f64> {
    if outcomes.is_empty() {
        return vec![0.0; levels];
    }
    (0..levels).map(|l| outcomes.iter().filter(|o| o.delta[l]).count() as f64 / outcomes.len() as f64).collect()
}

/// Length of the longest prefix of `outcomes` (ordered by distance) whose
/// users all reach `level`.
pub fn covered_prefix(outcomes: &[UserOutcome], level: usize) -> usize {
    outcomes.iter().take_while(|o| o.delta[level - 1]).count()
}

/// Profit and cost compared as exact fractions, then by fewer TBs, then by
/// the lexicographically smaller MCS and TB vectors.
pub(crate) fn better(a: (usize, usize, &[u8], &[usize]), b: (usize, usize, &[u8], &[usize])) -> bool {
    let (pa, ca, ma, na) = a;
    let (pb, cb, mb, nb) = b;
    let lhs = pa as u128 * cb as u128;
    let rhs = pb as u128 * ca as u128;
    if lhs != rhs {
        return lhs > rhs;
    }
    if ca != cb {
        return ca < cb;
    }
    (ma, na) < (mb, nb)
}

pub(crate) fn meets(prob: f64, q_hat: f64) -> bool {
    meets_target(prob, q_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn problem(k: &[usize], t_hat: &[f64], users: &[u8]) -> AllocationProblem {
        let l = k.len();
        let layers = LayerConfig::new(
            k.to_vec(),
            vec![1.0; l],
            (1..=l).map(|i| 20.0 + 5.0 * i as f64).collect(),
            t_hat.to_vec(),
        )
        .unwrap();
        AllocationProblem::new(layers, users.to_vec(), RadioConfig::default().with_rbp(1), 0.99).unwrap()
    }

    #[test]
    fn groups_and_candidates() {
        let p = problem(&[4], &[0.5], &[7, 3, 7, 12]);
        assert_eq!(p.groups(), vec![(3, 1), (7, 2), (12, 1)]);
        assert_eq!(p.candidate_mcs(), vec![7, 12]);
        assert_eq!(p.capacity(3), 0);
        assert_eq!(p.capacity(4), 2);
    }

    #[test]
    fn feasibility_boundaries() {
        let p = problem(&[4], &[0.5], &[4, 4, 9, 9]);
        // m = 9 reaches exactly half the users.
        let plan = p.plan(&[9], &[2]).unwrap();
        let sol = AllocationSolution::from_plan(&p, plan, SolverKind::Heuristic);
        let rep = check_feasibility(&p, &sol);
        assert_eq!(rep.achieved, vec![0.5]);
        assert!(rep.feasible && sol.feasible);
        assert_eq!(sol.profit(), 2);
        assert!((sol.tau - 1.0).abs() < 1e-15);
        // Over budget.
        let over = p.plan(&[9], &[p.n_hat[0] + 1]).unwrap();
        let sol = AllocationSolution::from_plan(&p, over, SolverKind::Heuristic);
        assert!(!check_feasibility(&p, &sol).feasible);
        assert!(!check_feasibility(&p, &sol).budget_ok[0]);
    }

    #[test]
    fn rejects_bad_problems() {
        let layers = LayerConfig::from_sizes(&[3]).unwrap();
        let r = RadioConfig::default();
        assert!(AllocationProblem::new(layers.clone(), vec![], r.clone(), 0.99).is_err());
        assert!(AllocationProblem::new(layers.clone(), vec![16], r.clone(), 0.99).is_err());
        assert!(AllocationProblem::new(layers.clone(), vec![5], r.clone(), 1.5).is_err());
        assert!(AllocationProblem::with_budgets(layers, vec![5], r, 0.99, vec![1, 2]).is_err());
    }

    #[test]
    fn tie_breaking() {
        // 2/1 == 4/2, fewer TBs wins.
        assert!(better((2, 1, &[5], &[1]), (4, 2, &[5], &[2])));
        assert!(!better((4, 2, &[5], &[2]), (2, 1, &[5], &[1])));
        assert!(better((3, 1, &[9], &[1]), (2, 1, &[5], &[1])));
        assert!(better((2, 1, &[5], &[1]), (2, 1, &[6], &[1])));
    }
}
