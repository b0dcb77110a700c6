//! Radio-frame quantities: stream segmentation, TB capacities and budgets.
//!
//! Units: bit rates in bits/s (1 kbps = 1000 b/s), element sizes in bits
//! (1 KB = 1024 bytes), durations in seconds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest MCS index with a TB capacity entry.
pub const MIN_TX_MCS: u8 = 4;
/// Highest MCS index.
pub const MAX_MCS: u8 = 15;

/// Coded elements per RBP for MCS 4..=15 with 2 KB elements.
pub const CAPACITY_PER_RBP: [usize; 12] = [2, 3, 5, 6, 8, 10, 12, 14, 17, 20, 66, 72];

// Guards ceilings against products such as 0.1 * 30 = 3.0000000000000004.
const CEIL_EPS: f64 = 1e-9;

fn ceil_tol(x: f64) -> usize {
    (x - CEIL_EPS).ceil().max(0.0) as usize
}

/// Number of source elements `⌈b · d_GoP / H⌉` of one layer.
pub fn source_elements(bitrate: f64, gop_duration: f64, element_bits: f64) -> Result<usize> {
    if !(bitrate > 0.0 && gop_duration > 0.0 && element_bits > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "source_elements needs positive inputs, got b={bitrate}, d={gop_duration}, H={element_bits}"
        )));
    }
    Ok(ceil_tol(bitrate * gop_duration / element_bits))
}

/// Coded elements carried by one TB of `n_rbp` RBPs at MCS `mcs`.
pub fn tb_capacity(mcs: u8, n_rbp: usize) -> Result<usize> {
    capacity_from_table(&CAPACITY_PER_RBP, mcs, n_rbp)
}

fn capacity_from_table(table: &[usize; 12], mcs: u8, n_rbp: usize) -> Result<usize> {
    if !(MIN_TX_MCS..=MAX_MCS).contains(&mcs) {
        return Err(Error::McsOutOfRange(mcs));
    }
    Ok(table[(mcs - MIN_TX_MCS) as usize] * n_rbp)
}

/// TB budget `⌈k/n_min⌉ + ⌈p̂ ⌈k/n_min⌉⌉`, before the frame cap.
pub fn n_hat(k: usize, p_hat: f64, n_min: usize) -> usize {
    if n_min == 0 {
        return 0;
    }
    let lossless = k.div_ceil(n_min);
    lossless + ceil_tol(p_hat * lossless as f64)
}

/// Frame-level cap `⌊f_eMBMS · d_GoP / d_TTI⌋` on any window's TB count.
pub fn frame_cap(embms_fraction: f64, gop_duration: f64, tti: f64) -> usize {
    (embms_fraction * gop_duration / tti + CEIL_EPS).floor() as usize
}

/// Radio parameters shared by every window of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    /// RBPs per TB.
    pub n_rbp: usize,
    /// Bits per source element (`H`).
    pub element_bits: f64,
    /// GoP duration in seconds.
    pub gop_duration: f64,
    /// TTI in seconds.
    pub tti: f64,
    /// Fraction of subframes usable by eMBMS.
    pub embms_fraction: f64,
    /// Target TB error probability behind CQI reports.
    pub p_hat: f64,
    /// Elements per RBP for MCS 4..=15.
    pub capacity_per_rbp: [usize; 12],
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            n_rbp: 5,
            element_bits: 2.0 * 1024.0 * 8.0,
            gop_duration: 0.533,
            tti: 1e-3,
            embms_fraction: 0.6,
            p_hat: 0.1,
            capacity_per_rbp: CAPACITY_PER_RBP,
        }
    }
}

impl RadioConfig {
    pub fn with_rbp(mut self, n_rbp: usize) -> Self {
        self.n_rbp = n_rbp;
        self
    }

    /// Capacity `n` of one TB at `mcs` with this config's RBP count.
    pub fn capacity(&self, mcs: u8) -> Result<usize> {
        capacity_from_table(&self.capacity_per_rbp, mcs, self.n_rbp)
    }

    /// Smallest TB capacity over the MCS table.
    pub fn n_min(&self) -> usize {
        self.capacity_per_rbp.iter().min().copied().unwrap_or(0) * self.n_rbp
    }

    pub fn frame_cap(&self) -> usize {
        frame_cap(self.embms_fraction, self.gop_duration, self.tti)
    }

    /// Per-window TB budget `N̂_ℓ`, frame cap included.
    pub fn tb_budget(&self, k: usize) -> usize {
        n_hat(k, self.p_hat, self.n_min()).min(self.frame_cap())
    }

    /// Source elements of a layer at `bitrate` bits/s.
    pub fn layer_elements(&self, bitrate: f64) -> Result<usize> {
        source_elements(bitrate, self.gop_duration, self.element_bits)
    }
}
