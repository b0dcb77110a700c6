//! Analytic window-recovery probabilities for expanding-window RLNC.
//!
//! For window `ℓ` the recovery probability is a sum over the numbers of
//! received TBs `r_1..r_ℓ`, weighted by independent binomial terms, of an
//! indicator `r_ℓ n_ℓ ≥ r_min,ℓ` (large-field approximation). The threshold
//! follows the recursion `r_min,1 = K_1`,
//! `r_min,ℓ = k_ℓ + max(r_min,ℓ−1 − r_ℓ−1 n_ℓ−1, 0)`.
//!
//! [`window_decode_prob`] evaluates the sum with a dynamic program over the
//! carried deficit `max(r_min,ℓ−1 − r_ℓ−1 n_ℓ−1, 0)`; [`brute_force_decode_prob`]
//! evaluates the nested sum literally and serves as its oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{LayerConfig, TransmissionPlan};

/// Probabilities this far below a target still count as meeting it.
pub const TARGET_SLACK: f64 = 1e-12;

/// Upper bound on the number of `r`-vectors the brute-force oracle visits.
pub const ENUMERATION_BOUND: u128 = 1_000_000;

/// TB counts above this use log-space binomial terms.
const LOG_SPACE_THRESHOLD: usize = 500;

/// Which received count offsets the carried deficit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeficitRule {
    /// `max(r_min,ℓ−1 − r_ℓ−1 · n_ℓ−1, 0)`: the previous window's supply
    /// offsets the previous window's requirement.
    #[default]
    PreviousWindow,
    /// `max(r_min,ℓ−1 − r_ℓ · n_ℓ−1, 0)`, index as typeset in the original
    /// recursion. Kept for comparison only.
    AsPrinted,
}

/// How a [`DecodeProbability`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Simulated { trials: u64 },
}

/// Per-window recovery probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeProbability {
    pub per_window: Vec<f64>,
    pub provenance: Provenance,
    /// Standard error per window, simulated estimates only.
    pub standard_error: Option<Vec<f64>>,
}

impl DecodeProbability {
    /// Probability for a 1-based window number.
    pub fn window(&self, window: usize) -> f64 {
        self.per_window[window - 1]
    }
}

/// Next threshold `k_new + max(deficit_in − r·n, 0)`.
#[inline]
pub fn deficit_transition(deficit_in: usize, r: usize, n: usize, k_new: usize) -> usize {
    k_new + deficit_in.saturating_sub(r * n)
}

/// Distribution of the number of received TBs out of `tbs`, each erased
/// independently with probability `erasure`. Index = received count.
pub fn received_pmf(tbs: usize, erasure: f64) -> Vec<f64> {
    let p = erasure.clamp(0.0, 1.0);
    let mut pmf = vec![0.0; tbs + 1];
    if p == 0.0 {
        pmf[tbs] = 1.0;
        return pmf;
    }
    if p == 1.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    let s = 1.0 - p;
    if tbs > LOG_SPACE_THRESHOLD {
        let (ln_s, ln_p) = (s.ln(), p.ln());
        let mut ln_choose = 0.0;
        for (r, slot) in pmf.iter_mut().enumerate() {
            if r > 0 {
                ln_choose += ((tbs - r + 1) as f64).ln() - (r as f64).ln();
            }
            *slot = (ln_choose + r as f64 * ln_s + (tbs - r) as f64 * ln_p).exp();
        }
    } else {
        let mut choose = 1.0;
        for (r, slot) in pmf.iter_mut().enumerate() {
            if r > 0 {
                choose = choose * (tbs - r + 1) as f64 / r as f64;
            }
            *slot = choose * s.powi(r as i32) * p.powi((tbs - r) as i32);
        }
    }
    pmf
}

/// `tail[j] = P(r ≥ j)` for `j = 0..=len`, accumulated from the top.
fn tail_sums(pmf: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; pmf.len() + 1];
    for j in (0..pmf.len()).rev() {
        tail[j] = tail[j + 1] + pmf[j];
    }
    tail
}

/// Smallest received-TB count `r` with `r · n ≥ need`, `None` if unreachable.
#[inline]
fn tbs_needed(need: usize, n: usize) -> Option<usize> {
    if need == 0 {
        Some(0)
    } else if n == 0 {
        None
    } else {
        Some(need.div_ceil(n))
    }
}

/// Received-count distribution of one window, with its tail sums.
#[derive(Debug, Clone)]
pub struct WindowReception {
    pmf: Vec<f64>,
    tail: Vec<f64>,
}

impl WindowReception {
    pub fn new(tbs: usize, erasure: f64) -> Self {
        let pmf = received_pmf(tbs, erasure);
        let tail = tail_sums(&pmf);
        Self { pmf, tail }
    }

    /// `P(r · n ≥ need)`.
    #[inline]
    pub fn prob_at_least(&self, need: usize, n: usize) -> f64 {
        match tbs_needed(need, n) {
            Some(j) if j < self.tail.len() => self.tail[j],
            _ => 0.0,
        }
    }
}

/// Distribution of the deficit carried into the next window.
///
/// Index `c` holds `P(max(r_min − r·n, 0) = c)` for the window last folded
/// in. The carried deficit never exceeds the cumulative size of the windows
/// folded so far, so the support stays within `K_ℓ + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryDistribution {
    weights: Vec<f64>,
}

impl Default for CarryDistribution {
    fn default() -> Self {
        Self::start()
    }
}

impl CarryDistribution {
    /// Nothing carried into window 1.
    pub fn start() -> Self {
        Self { weights: vec![1.0] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability that a window with `k` new elements and capacity `n`
    /// is recovered, given this carry.
    pub fn window_success(&self, k: usize, n: usize, rx: &WindowReception) -> f64 {
        self.weights.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(c, w)| w * rx.prob_at_least(k + c, n)).sum()
    }

    /// Folds one more window in and returns the carry into the next one.
    pub fn advance(&self, k: usize, n: usize, rx: &WindowReception) -> CarryDistribution {
        let mut next = vec![0.0; self.weights.len() + k];
        for (c, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let need = k + c;
            let full = tbs_needed(need, n).unwrap_or(usize::MAX);
            for (r, &pr) in rx.pmf.iter().enumerate().take(full.min(rx.pmf.len())) {
                next[need - r * n] += w * pr;
            }
            if full < rx.tail.len() {
                next[0] += w * rx.tail[full];
            }
        }
        while next.len() > 1 && next.last() == Some(&0.0) {
            next.pop();
        }
        CarryDistribution { weights: next }
    }
}

fn check_inputs(layers: &LayerConfig, plan: &TransmissionPlan, erasure: &[f64]) -> Result<()> {
    plan.check_against(layers)?;
    if erasure.len() != layers.count() {
        return Err(Error::InvalidParameter(format!(
            "{} erasure probabilities for {} windows",
            erasure.len(),
            layers.count()
        )));
    }
    if let Some(p) = erasure.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!("erasure probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Recovery probability of window `window` (1-based).
pub fn window_decode_prob(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    window: usize,
) -> Result<f64> {
    window_decode_prob_with(layers, plan, erasure, window, DeficitRule::PreviousWindow)
}

/// [`window_decode_prob`] under an explicit [`DeficitRule`].
pub fn window_decode_prob_with(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    window: usize,
    rule: DeficitRule,
) -> Result<f64> {
    layers.check_window(window)?;
    check_inputs(layers, plan, erasure)?;
    let p = match rule {
        DeficitRule::PreviousWindow => {
            let k = layers.sizes();
            let mut carry = CarryDistribution::start();
            for i in 0..window - 1 {
                let rx = WindowReception::new(plan.tbs[i], erasure[i]);
                carry = carry.advance(k[i], plan.capacity[i], &rx);
            }
            let last = window - 1;
            let rx = WindowReception::new(plan.tbs[last], erasure[last]);
            carry.window_success(k[last], plan.capacity[last], &rx)
        }
        DeficitRule::AsPrinted => as_printed_dp(layers, plan, erasure, window),
    };
    Ok(p.clamp(0.0, 1.0))
}

// State after window j is r_min,j itself, which under this rule depends on
// r_j through the n_{j−1} term.
fn as_printed_dp(layers: &LayerConfig, plan: &TransmissionPlan, erasure: &[f64], window: usize) -> f64 {
    let k = layers.sizes();
    let n = &plan.capacity;
    let pmf = |i: usize| received_pmf(plan.tbs[i], erasure[i]);
    if window == 1 {
        let rx = WindowReception::new(plan.tbs[0], erasure[0]);
        return rx.prob_at_least(k[0], n[0]);
    }
    // r_min,1 = K_1 with certainty.
    let mut state = vec![0.0; k[0] + 1];
    state[k[0]] = 1.0;
    for j in 1..window {
        let pr = pmf(j);
        if j == window - 1 {
            let mut total = 0.0;
            for (prev, &w) in state.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                for (r, &q) in pr.iter().enumerate() {
                    let need = deficit_transition(prev, r, n[j - 1], k[j]);
                    if r * n[j] >= need {
                        total += w * q;
                    }
                }
            }
            return total;
        }
        let mut next = vec![0.0; state.len() + k[j]];
        for (prev, &w) in state.iter().enumerate().filter(|(_, w)| **w != 0.0) {
            for (r, &q) in pr.iter().enumerate() {
                next[deficit_transition(prev, r, n[j - 1], k[j])] += w * q;
            }
        }
        state = next;
    }
    unreachable!("loop returns at the target window")
}

/// Recovery probabilities of every window in one pass.
pub fn decode_probabilities(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
) -> Result<DecodeProbability> {
    check_inputs(layers, plan, erasure)?;
    Ok(DecodeProbability {
        per_window: window_probs_unchecked(layers.sizes(), &plan.tbs, &plan.capacity, erasure),
        provenance: Provenance::Analytic,
        standard_error: None,
    })
}

pub(crate) fn window_probs_unchecked(k: &[usize], tbs: &[usize], n: &[usize], erasure: &[f64]) -> Vec<f64> {
    let mut carry = CarryDistribution::start();
    let mut out = Vec::with_capacity(k.len());
    for i in 0..k.len() {
        let rx = WindowReception::new(tbs[i], erasure[i]);
        out.push(carry.window_success(k[i], n[i], &rx).clamp(0.0, 1.0));
        if i + 1 < k.len() {
            carry = carry.advance(k[i], n[i], &rx);
        }
    }
    out
}

fn binomial_term(tbs: usize, r: usize, erasure: f64) -> f64 {
    let mut choose = 1.0f64;
    for i in 0..r {
        choose *= (tbs - i) as f64 / (i + 1) as f64;
    }
    choose * (1.0 - erasure).powi(r as i32) * erasure.powi((tbs - r) as i32)
}

/// Literal nested-sum evaluation over every `r`-vector; oracle for the DP.
pub fn brute_force_decode_prob(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    window: usize,
) -> Result<f64> {
    brute_force_decode_prob_with(layers, plan, erasure, window, DeficitRule::PreviousWindow)
}

pub fn brute_force_decode_prob_with(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    window: usize,
    rule: DeficitRule,
) -> Result<f64> {
    layers.check_window(window)?;
    check_inputs(layers, plan, erasure)?;
    let tbs = &plan.tbs[..window];
    let needed: u128 = tbs.iter().map(|&t| t as u128 + 1).product();
    if needed > ENUMERATION_BOUND {
        return Err(Error::EnumerationTooLarge { needed, bound: ENUMERATION_BOUND });
    }
    let k = layers.sizes();
    let n = &plan.capacity;
    let mut r = vec![0usize; window];
    let mut total = 0.0;
    loop {
        let weight: f64 = (0..window).map(|i| binomial_term(tbs[i], r[i], erasure[i])).product();
        let mut r_min = k[0];
        for i in 1..window {
            let offset = match rule {
                DeficitRule::PreviousWindow => r[i - 1] * n[i - 1],
                DeficitRule::AsPrinted => r[i] * n[i - 1],
            };
            r_min = k[i] + r_min.saturating_sub(offset);
        }
        if r[window - 1] * n[window - 1] >= r_min {
            total += weight;
        }
        // Mixed-radix increment.
        let mut i = 0;
        loop {
            if i == window {
                return Ok(total);
            }
            r[i] += 1;
            if r[i] <= tbs[i] {
                break;
            }
            r[i] = 0;
            i += 1;
        }
    }
}

/// `true` iff the probability meets `q_hat` up to [`TARGET_SLACK`].
#[inline]
pub fn meets_target(prob: f64, q_hat: f64) -> bool {
    prob >= q_hat - TARGET_SLACK
}

/// QoS indicators for all levels: level `ℓ` is reached iff some window
/// `i ≥ ℓ` is recovered with probability at least `q_hat`.
pub fn qos_indicators(window_probs: &[f64], q_hat: f64) -> Vec<bool> {
    let mut out = vec![false; window_probs.len()];
    let mut any = false;
    for i in (0..window_probs.len()).rev() {
        any |= meets_target(window_probs[i], q_hat);
        out[i] = any;
    }
    out
}

/// QoS indicator for level `window` (1-based).
pub fn qos_indicator(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    q_hat: f64,
    window: usize,
) -> Result<bool> {
    layers.check_window(window)?;
    let probs = decode_probabilities(layers, plan, erasure)?;
    Ok(qos_indicators(&probs.per_window, q_hat)[window - 1])
}

/// Recovered levels across all users divided by the TBs spent.
pub fn profit_cost_ratio<R: AsRef<[bool]>>(delta: &[R], tbs: &[usize]) -> Result<f64> {
    let cost: usize = tbs.iter().sum();
    if cost == 0 {
        return Err(Error::UndefinedRatio);
    }
    let profit: usize = delta.iter().map(|row| row.as_ref().iter().filter(|d| **d).count()).sum();
    Ok(profit as f64 / cost as f64)
}

/// Largest `ρ_ℓ · P(recover window ℓ)`; 0 when nothing is recoverable.
pub fn max_psnr_uep(layers: &LayerConfig, plan: &TransmissionPlan, erasure_user: &[f64]) -> Result<f64> {
    let probs = decode_probabilities(layers, plan, erasure_user)?;
    Ok(weighted_max(layers.psnr(), &probs.per_window))
}

/// Uncoded delivery: layers `1..=ℓ` are recovered only if every one of their
/// `⌈k_i / n_i⌉` TBs arrives.
pub fn mrt_recovery_probs(layers: &LayerConfig, capacity: &[usize], erasure_user: &[f64]) -> Vec<f64> {
    let mut acc = 1.0;
    layers
        .sizes()
        .iter()
        .zip(capacity)
        .zip(erasure_user)
        .map(|((&k, &n), &p)| {
            acc *= match n {
                0 => 0.0,
                _ => (1.0 - p).powi(k.div_ceil(n) as i32),
            };
            acc
        })
        .collect()
}

/// TB counts `⌈k_ℓ / n_ℓ⌉` of uncoded delivery.
pub fn uncoded_tbs(layers: &LayerConfig, capacity: &[usize]) -> Vec<usize> {
    layers.sizes().iter().zip(capacity).map(|(&k, &n)| if n == 0 { 0 } else { k.div_ceil(n) }).collect()
}

/// Largest `ρ_ℓ · Ṗ_ℓ` under uncoded delivery.
pub fn max_psnr_mrt(layers: &LayerConfig, plan: &TransmissionPlan, erasure_user: &[f64]) -> Result<f64> {
    check_inputs(layers, plan, erasure_user)?;
    let probs = mrt_recovery_probs(layers, &plan.capacity, erasure_user);
    Ok(weighted_max(layers.psnr(), &probs))
}

fn weighted_max(psnr: &[f64], probs: &[f64]) -> f64 {
    psnr.iter().zip(probs).map(|(r, p)| r * p).fold(0.0, f64::max)
}
