//! Link abstraction: SINR thresholds per MCS, parametric BLER, CQI reports
//! and per-user PDU erasure probabilities.

use serde::{Deserialize, Serialize};

use super::layout::Point;
use super::radio::MAX_MCS;

/// Default SINR thresholds (dB) for MCS 1..=15. Entries for MCS 4..=15
/// start at −4 dB with 1.8 dB spacing; MCS 1..=3 continue the same spacing
/// downwards and can be reported but not transmitted.
pub const DEFAULT_THRESHOLDS_DB: [f64; 15] =
    [-9.4, -7.6, -5.8, -4.0, -2.2, -0.4, 1.4, 3.2, 5.0, 6.8, 8.6, 10.4, 12.2, 14.0, 15.8];

/// Parametric TB error model: `bler(s, m) = min(1, p̂ · 10^(−(s − γ_m)/Δ))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlerModel {
    /// `γ_m` for m = 1..=15, non-decreasing.
    pub thresholds_db: [f64; 15],
    /// dB of SINR per decade of BLER.
    pub delta_db: f64,
    /// BLER at the threshold.
    pub p_hat: f64,
}

impl Default for BlerModel {
    fn default() -> Self {
        Self { thresholds_db: DEFAULT_THRESHOLDS_DB, delta_db: 1.0, p_hat: 0.1 }
    }
}

impl BlerModel {
    pub fn threshold(&self, mcs: u8) -> f64 {
        self.thresholds_db[(mcs.clamp(1, MAX_MCS) - 1) as usize]
    }

    /// TB error probability at `sinr_db` for MCS `mcs`.
    pub fn bler(&self, sinr_db: f64, mcs: u8) -> f64 {
        if sinr_db == f64::NEG_INFINITY {
            return 1.0;
        }
        let excess = sinr_db - self.threshold(mcs);
        (self.p_hat * 10f64.powf(-excess / self.delta_db)).min(1.0)
    }

    /// Largest MCS with `bler ≤ p̂`, at least 1.
    pub fn cqi_mcs(&self, sinr_db: f64) -> u8 {
        (1..=MAX_MCS).rev().find(|&m| sinr_db >= self.threshold(m)).unwrap_or(1)
    }
}

/// How PDU erasure probabilities are assigned to a user.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErasureView {
    /// `p̂` if the window's MCS does not exceed the user's report, else 1.
    #[default]
    Allocator,
    /// BLER curve at the user's SINR.
    Evaluation,
}

/// A multicast receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserContext {
    pub position: Point,
    pub sinr_db: f64,
    /// Reported MCS `m^(u)`.
    pub mcs_feedback: u8,
}

impl UserContext {
    pub fn new(position: Point, sinr_db: f64, bler: &BlerModel) -> Self {
        Self { position, sinr_db, mcs_feedback: bler.cqi_mcs(sinr_db) }
    }

    /// PDU erasure probability for a window sent at `mcs`.
    pub fn erasure_prob(&self, mcs: u8, view: ErasureView, bler: &BlerModel) -> f64 {
        match view {
            ErasureView::Allocator => allocator_erasure(self.mcs_feedback, mcs, bler.p_hat),
            ErasureView::Evaluation => bler.bler(self.sinr_db, mcs),
        }
    }

    /// Erasure probabilities for every window of a plan.
    pub fn erasure_vector(&self, mcs: &[u8], view: ErasureView, bler: &BlerModel) -> Vec<f64> {
        mcs.iter().map(|&m| self.erasure_prob(m, view, bler)).collect()
    }
}

/// Allocator view of the erasure probability.
#[inline]
pub fn allocator_erasure(feedback: u8, mcs: u8, p_hat: f64) -> f64 {
    if mcs <= feedback {
        p_hat
    } else {
        1.0
    }
}
