//! Analytic decoding probabilities against Monte Carlo rank simulation.

use std::time::Instant;

use super::{Cell, ExperimentResult};
use crate::decode_prob::decode_probabilities;
use crate::error::{Error, Result};
use crate::layers::{LayerConfig, TransmissionPlan};
use crate::rlnc::{derive_seed, simulate_decode_prob};
use crate::scenario::ValidationSection;

/// Fixed part of the accepted gap.
pub const GAP_TOLERANCE: f64 = 7e-3;
/// Standard errors added to [`GAP_TOLERANCE`].
pub const SE_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub capacity: usize,
    pub erasure: f64,
    pub t: usize,
    /// 1-based.
    pub window: usize,
    pub analytic: f64,
    pub simulated: f64,
    pub standard_error: f64,
}

impl ValidationRow {
    pub fn gap(&self) -> f64 {
        (self.analytic - self.simulated).abs()
    }

    pub fn bound(&self) -> f64 {
        GAP_TOLERANCE + SE_MULTIPLIER * self.standard_error
    }
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub rows: Vec<ValidationRow>,
    pub result: ExperimentResult,
}

impl Validation {
    /// Largest `gap − bound`; non-positive when every point agrees.
    pub fn max_excess(&self) -> f64 {
        self.rows.iter().map(|r| r.gap() - r.bound()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(ValidationRow::gap).fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_excess() <= 0.0
    }
}

/// Sweeps `N_ℓ = t` for every capacity and erasure pair until all windows
/// saturate, simulating `trials` receptions per point.
pub fn validate_approx(cfg: &ValidationSection, seed: u64, digest: &str) -> Result<Validation> {
    let start = Instant::now();
    if cfg.t_step == 0 {
        return Err(Error::InvalidParameter("t_step must be positive".into()));
    }
    if cfg.trials < 10_000 {
        log::warn!("{} trials per point give wide confidence bands", cfg.trials);
    }
    let layers = LayerConfig::from_cumulative(&cfg.cumulative)?;
    let l = layers.count();
    let mut rows = Vec::new();
    let mut point = 0u64;
    for &n in &cfg.capacities {
        for &p in &cfg.erasures {
            let mut t = 1;
            while t <= cfg.t_max {
                let plan = TransmissionPlan::uniform(l, t, n);
                let erasure = vec![p; l];
                let analytic = decode_probabilities(&layers, &plan, &erasure)?;
                let sim = simulate_decode_prob(&layers, &plan, &erasure, cfg.trials, derive_seed(seed, point))?;
                point += 1;
                let se = sim.standard_error.clone().unwrap_or_else(|| vec![0.0; l]);
                for w in 0..l {
                    rows.push(ValidationRow {
                        capacity: n,
                        erasure: p,
                        t,
                        window: w + 1,
                        analytic: analytic.per_window[w],
                        simulated: sim.per_window[w],
                        standard_error: se[w],
                    });
                }
                if analytic.per_window.iter().all(|&a| a >= 1.0 - cfg.saturation) {
                    break;
                }
                t += cfg.t_step;
            }
        }
    }
    let mut result = ExperimentResult::new(
        "validate-approx",
        digest,
        vec![("monte-carlo".into(), seed)],
        &["capacity", "erasure", "t", "window", "analytic", "simulated", "std_error", "abs_gap", "bound"],
    );
    for r in &rows {
        result.push(vec![
            r.capacity.into(),
            r.erasure.into(),
            r.t.into(),
            r.window.into(),
            r.analytic.into(),
            r.simulated.into(),
            r.standard_error.into(),
            r.gap().into(),
            Cell::from(r.bound()),
        ]);
    }
    result.runtime = start.elapsed();
    Ok(Validation { rows, result })
}
