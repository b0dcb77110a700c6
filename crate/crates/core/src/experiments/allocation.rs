//! Allocation experiments: RBP sweeps, coverage along a radial line and PSNR
//! maps over a grid.

use std::time::Instant;

use super::{Cell, ExperimentResult};
use crate::allocators::{
    check_feasibility, covered_prefix, direct_uep_ram, evaluate_users, heuristic_uep_ram, level_fractions, solve_mrt,
    AllocationProblem, AllocationSolution, DirectConfig, DirectMode, UserOutcome,
};
use crate::channel::layout::NetworkLayout;
use crate::channel::link::UserContext;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Which allocator a single-scenario run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverChoice {
    Heuristic,
    Direct(DirectConfig),
    Mrt,
}

impl SolverChoice {
    pub fn run(&self, problem: &AllocationProblem) -> Result<AllocationSolution> {
        match self {
            SolverChoice::Heuristic => heuristic_uep_ram(problem),
            SolverChoice::Direct(cfg) => direct_uep_ram(problem, cfg),
            SolverChoice::Mrt => solve_mrt(problem),
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn seeds(scenario: &Scenario, direct: Option<&DirectConfig>) -> Vec<(String, u64)> {
    let mut s = vec![("scenario".to_string(), scenario.seed)];
    if let Some(sh) = &scenario.shadowing {
        s.push(("shadowing".into(), sh.seed));
    }
    if let Some(d) = direct {
        if d.mode != DirectMode::Exhaustive {
            s.push(("genetic".into(), d.genetic.seed));
        }
    }
    s
}

/// Heuristic against direct search for every RBP count of the scenario.
/// Points without a feasible plan are kept with an `infeasible` status.
pub fn rbp_sweep(scenario: &Scenario, direct: Option<&DirectConfig>) -> Result<ExperimentResult> {
    let start = Instant::now();
    let users = scenario.place_users()?;
    let mut result = ExperimentResult::new(
        "sweep-rbp",
        &scenario.digest()?,
        seeds(scenario, direct),
        &[
            "n_rbp",
            "heuristic_status",
            "heuristic_tau",
            "heuristic_tbs",
            "heuristic_mcs",
            "heuristic_n",
            "direct_status",
            "direct_solver",
            "direct_tau",
            "direct_tbs",
            "direct_mcs",
            "direct_n",
            "gap",
        ],
    );
    let mut rbps = scenario.allocation.rbp_sweep.clone();
    rbps.sort_unstable();
    rbps.dedup();
    for n_rbp in rbps {
        let problem = scenario.problem(&users, n_rbp)?;
        let mut row: Vec<Cell> = vec![n_rbp.into()];
        let h = outcome_cells(heuristic_uep_ram(&problem))?;
        let h_tau = h.tau;
        row.extend(h.cells);
        let mut d_tau = None;
        if let Some(cfg) = direct {
            let sol = direct_uep_ram(&problem, cfg);
            let solver = sol.as_ref().ok().map(|s| format!("{:?}", s.solver).to_lowercase());
            let d = outcome_cells(sol)?;
            d_tau = d.tau;
            let mut cells = d.cells.into_iter();
            row.extend(cells.next());
            row.push(solver.into());
            row.extend(cells);
        } else {
            row.extend(["off".into(), Cell::from(""), "".into(), "".into(), "".into(), "".into()]);
        }
        let gap = match (h_tau, d_tau) {
            (Some(h), Some(d)) if d > 0.0 => Some((d - h) / d),
            _ => None,
        };
        row.push(gap.into());
        result.push(row);
    }
    result.runtime = start.elapsed();
    Ok(result)
}

struct Outcome {
    tau: Option<f64>,
    cells: Vec<Cell>,
}

fn outcome_cells(sol: Result<AllocationSolution>) -> Result<Outcome> {
    match sol {
        Ok(s) if s.feasible => Ok(Outcome {
            tau: Some(s.tau),
            cells: vec![
                "feasible".into(),
                s.tau.into(),
                s.plan.total_tbs().into(),
                join(&s.plan.mcs).into(),
                join(&s.plan.tbs).into(),
            ],
        }),
        Ok(_) | Err(Error::NoSolution) => {
            Ok(Outcome { tau: None, cells: vec!["infeasible".into(), "".into(), "".into(), "".into(), "".into()] })
        }
        Err(e) => Err(e),
    }
}

/// Per-level result of one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub solution: AllocationSolution,
    pub outcomes: Vec<UserOutcome>,
    /// Fraction of users meeting `Q̂` at each level.
    pub fractions: Vec<f64>,
    pub mean_psnr: f64,
}

impl StrategySummary {
    fn new(solution: AllocationSolution, outcomes: Vec<UserOutcome>, levels: usize) -> Self {
        let fractions = level_fractions(&outcomes, levels);
        let mean_psnr = if outcomes.is_empty() {
            0.0
        } else {
            outcomes.iter().map(|o| o.psnr).sum::<f64>() / outcomes.len() as f64
        };
        Self { solution, outcomes, fractions, mean_psnr }
    }
}

/// UEP-RAM and MrT solved and evaluated on the same users.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub layout: NetworkLayout,
    pub users: Vec<UserContext>,
    pub problem: AllocationProblem,
    pub uep: StrategySummary,
    pub mrt: StrategySummary,
}

impl Comparison {
    pub fn build(scenario: &Scenario, uep: &SolverChoice) -> Result<Self> {
        let layout = scenario.layout();
        let users = scenario.place_users()?;
        let problem = scenario.problem(&users, scenario.radio.n_rbp)?;
        let levels = problem.windows();
        let view = scenario.allocation.erasure_view;
        let q_hat = scenario.allocation.q_hat;
        let mut summaries = Vec::with_capacity(2);
        for choice in [uep, &SolverChoice::Mrt] {
            let sol = choice.run(&problem)?;
            if !check_feasibility(&problem, &sol).feasible {
                log::warn!("{:?} plan misses its coverage targets", sol.solver);
            }
            let outcomes = evaluate_users(&problem.layers, &sol, &users, view, &scenario.bler, q_hat);
            summaries.push(StrategySummary::new(sol, outcomes, levels));
        }
        let mrt = summaries.pop().unwrap();
        let uep = summaries.pop().unwrap();
        Ok(Self { layout, users, problem, uep, mrt })
    }

    fn strategies(&self) -> [(&'static str, &StrategySummary); 2] {
        [("uep-ram", &self.uep), ("mrt", &self.mrt)]
    }
}

/// Coverage of a single cell along a line of users.
#[derive(Debug, Clone)]
pub struct CoverageOutcome {
    pub comparison: Comparison,
    /// Distance of each user from the serving site, in user order.
    pub distance_m: Vec<f64>,
    /// Per strategy and level, the distance of the farthest user in the
    /// covered prefix ordered by distance.
    pub uep_radius_m: Vec<Option<f64>>,
    pub mrt_radius_m: Vec<Option<f64>>,
    /// One row per user, level and strategy.
    pub curves: ExperimentResult,
    /// One row per strategy and level.
    pub summary: ExperimentResult,
}

fn radius(outcomes: &[UserOutcome], order: &[usize], distance: &[f64], levels: usize) -> Vec<Option<f64>> {
    let sorted: Vec<UserOutcome> = order.iter().map(|&i| outcomes[i].clone()).collect();
    (1..=levels)
        .map(|l| match covered_prefix(&sorted, l) {
            0 => None,
            c => Some(distance[order[c - 1]]),
        })
        .collect()
}

pub fn coverage_sc(scenario: &Scenario, uep: &SolverChoice) -> Result<CoverageOutcome> {
    let start = Instant::now();
    let comparison = Comparison::build(scenario, uep)?;
    let site = comparison.layout.sites[comparison.layout.serving_sites[0]];
    let distance_m: Vec<f64> = comparison.users.iter().map(|u| u.position.distance(&site)).collect();
    let mut order: Vec<usize> = (0..distance_m.len()).collect();
    order.sort_by(|&a, &b| distance_m[a].total_cmp(&distance_m[b]).then(a.cmp(&b)));
    let levels = comparison.problem.windows();
    let uep_radius_m = radius(&comparison.uep.outcomes, &order, &distance_m, levels);
    let mrt_radius_m = radius(&comparison.mrt.outcomes, &order, &distance_m, levels);

    let digest = scenario.digest()?;
    let direct = match uep {
        SolverChoice::Direct(cfg) => Some(cfg),
        _ => None,
    };
    let mut curves = ExperimentResult::new(
        "coverage-sc",
        &digest,
        seeds(scenario, direct),
        &["distance_m", "user", "sinr_db", "mcs_feedback", "strategy", "level", "probability", "covered", "psnr_db"],
    );
    for &i in &order {
        let u = &comparison.users[i];
        for (name, s) in comparison.strategies() {
            let o = &s.outcomes[i];
            for l in 0..levels {
                curves.push(vec![
                    distance_m[i].into(),
                    i.into(),
                    u.sinr_db.into(),
                    u.mcs_feedback.into(),
                    name.into(),
                    (l + 1).into(),
                    o.probs[l].into(),
                    (o.delta[l] as usize).into(),
                    o.psnr.into(),
                ]);
            }
        }
    }
    let mut summary = ExperimentResult::new(
        "coverage-sc-summary",
        &digest,
        seeds(scenario, direct),
        &["strategy", "level", "fraction", "radius_m", "mcs", "tbs"],
    );
    for ((name, s), radii) in comparison.strategies().into_iter().zip([&uep_radius_m, &mrt_radius_m]) {
        for l in 0..levels {
            summary.push(vec![
                name.into(),
                (l + 1).into(),
                s.fractions[l].into(),
                radii[l].into(),
                s.solution.plan.mcs[l].into(),
                s.solution.plan.tbs[l].into(),
            ]);
        }
    }
    curves.runtime = start.elapsed();
    summary.runtime = curves.runtime;
    Ok(CoverageOutcome { comparison, distance_m, uep_radius_m, mrt_radius_m, curves, summary })
}

/// PSNR of every grid point under both strategies.
#[derive(Debug, Clone)]
pub struct PsnrMapOutcome {
    pub comparison: Comparison,
    /// One row per grid point.
    pub map: ExperimentResult,
    /// Fraction of points reaching each level, per strategy.
    pub summary: ExperimentResult,
}

pub fn psnr_map_sfn(scenario: &Scenario, uep: &SolverChoice) -> Result<PsnrMapOutcome> {
    let start = Instant::now();
    let comparison = Comparison::build(scenario, uep)?;
    let digest = scenario.digest()?;
    let direct = match uep {
        SolverChoice::Direct(cfg) => Some(cfg),
        _ => None,
    };
    let mut map = ExperimentResult::new(
        "psnr-map-sfn",
        &digest,
        seeds(scenario, direct),
        &["x_m", "y_m", "sinr_db", "mcs_feedback", "psnr_uep_db", "psnr_mrt_db", "level_uep", "level_mrt"],
    );
    let users = &comparison.users;
    let mut order: Vec<usize> = (0..users.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&users[a].position, &users[b].position);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(a.cmp(&b))
    });
    let top_level = |o: &UserOutcome| o.delta.iter().take_while(|&&d| d).count();
    for &i in &order {
        let u = &users[i];
        let (a, b) = (&comparison.uep.outcomes[i], &comparison.mrt.outcomes[i]);
        map.push(vec![
            u.position.x.into(),
            u.position.y.into(),
            u.sinr_db.into(),
            u.mcs_feedback.into(),
            a.psnr.into(),
            b.psnr.into(),
            top_level(a).into(),
            top_level(b).into(),
        ]);
    }
    let mut summary = ExperimentResult::new(
        "psnr-map-sfn-summary",
        &digest,
        seeds(scenario, direct),
        &["strategy", "level", "fraction", "mean_psnr_db", "mcs", "tbs"],
    );
    for (name, s) in comparison.strategies() {
        for l in 0..comparison.problem.windows() {
            summary.push(vec![
                name.into(),
                (l + 1).into(),
                s.fractions[l].into(),
                s.mean_psnr.into(),
                s.solution.plan.mcs[l].into(),
                s.solution.plan.tbs[l].into(),
            ]);
        }
    }
    map.runtime = start.elapsed();
    summary.runtime = map.runtime;
    Ok(PsnrMapOutcome { comparison, map, summary })
}

/// Solves the scenario at its configured RBP count and tabulates the plan.
pub fn solve(scenario: &Scenario, choice: &SolverChoice) -> Result<(AllocationSolution, ExperimentResult)> {
    let start = Instant::now();
    let users = scenario.place_users()?;
    let problem = scenario.problem(&users, scenario.radio.n_rbp)?;
    let sol = choice.run(&problem)?;
    let report = check_feasibility(&problem, &sol);
    let direct = match choice {
        SolverChoice::Direct(cfg) => Some(cfg),
        _ => None,
    };
    let mut result = ExperimentResult::new(
        "solve",
        &scenario.digest()?,
        seeds(scenario, direct),
        &["window", "k", "mcs", "tbs", "elements_per_tb", "budget", "target", "achieved", "coverage_ok"],
    );
    let t_hat = problem.layers.coverage_targets();
    for w in 0..problem.windows() {
        result.push(vec![
            (w + 1).into(),
            problem.layers.sizes()[w].into(),
            sol.plan.mcs[w].into(),
            sol.plan.tbs[w].into(),
            sol.plan.capacity[w].into(),
            problem.n_hat[w].into(),
            t_hat[w].into(),
            report.achieved[w].into(),
            (report.coverage_ok[w] as usize).into(),
        ]);
    }
    result.runtime = start.elapsed();
    Ok((sol, result))
}
