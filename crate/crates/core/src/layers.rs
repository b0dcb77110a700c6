//! Layered source message and per-window transmission parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-layer description of a layered source message (one GoP).
///
/// Layer `ℓ` holds `k[ℓ]` source elements; expanding window `ℓ` spans the
/// first `cumulative[ℓ]` elements. Vectors are 0-based internally, while
/// functions taking a `window` argument use 1-based window numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    k: Vec<usize>,
    cumulative: Vec<usize>,
    bitrate: Vec<f64>,
    psnr: Vec<f64>,
    t_hat: Vec<f64>,
}

impl LayerConfig {
    pub fn new(k: Vec<usize>, bitrate: Vec<f64>, psnr: Vec<f64>, t_hat: Vec<f64>) -> Result<Self> {
        let layers = k.len();
        if layers == 0 {
            return Err(Error::InvalidLayers("at least one layer is required".into()));
        }
        if bitrate.len() != layers || psnr.len() != layers || t_hat.len() != layers {
            return Err(Error::InvalidLayers(format!(
                "length mismatch: k={}, bitrate={}, psnr={}, t_hat={}",
                layers,
                bitrate.len(),
                psnr.len(),
                t_hat.len()
            )));
        }
        if let Some(pos) = k.iter().position(|&v| v == 0) {
            return Err(Error::InvalidLayers(format!("layer {} has zero elements", pos + 1)));
        }
        if let Some(t) = t_hat.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::InvalidLayers(format!("coverage target {t} outside (0, 1]")));
        }
        if t_hat.windows(2).any(|w| w[1] > w[0]) {
            log::warn!("coverage targets increase with the layer index: {t_hat:?}");
        }
        let cumulative = k
            .iter()
            .scan(0usize, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        Ok(Self { k, cumulative, bitrate, psnr, t_hat })
    }

    /// Layers described only by their element counts (coding experiments).
    pub fn from_sizes(k: &[usize]) -> Result<Self> {
        let l = k.len();
        Self::new(k.to_vec(), vec![0.0; l], vec![0.0; l], vec![1.0; l])
    }

    /// Layers given by cumulative window sizes, e.g. `K = {10, 50, 100}`.
    pub fn from_cumulative(cumulative: &[usize]) -> Result<Self> {
        let mut prev = 0;
        let mut k = Vec::with_capacity(cumulative.len());
        for &c in cumulative {
            if c <= prev {
                return Err(Error::InvalidLayers(format!(
                    "cumulative sizes must be strictly increasing: {cumulative:?}"
                )));
            }
            k.push(c - prev);
            prev = c;
        }
        Self::from_sizes(&k)
    }

    pub fn count(&self) -> usize {
        self.k.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.k
    }

    pub fn cumulative(&self) -> &[usize] {
        &self.cumulative
    }

    /// `K_ℓ` for a 1-based window number.
    pub fn window_size(&self, window: usize) -> Result<usize> {
        self.check_window(window)?;
        Ok(self.cumulative[window - 1])
    }

    pub fn total(&self) -> usize {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn bitrate(&self) -> &[f64] {
        &self.bitrate
    }

    pub fn psnr(&self) -> &[f64] {
        &self.psnr
    }

    pub fn coverage_targets(&self) -> &[f64] {
        &self.t_hat
    }

    pub(crate) fn check_window(&self, window: usize) -> Result<()> {
        if window == 0 || window > self.count() {
            Err(Error::WindowOutOfRange { index: window, layers: self.count() })
        } else {
            Ok(())
        }
    }
}

/// Decision variables for one GoP: MCS `m_ℓ`, TB count `N_ℓ` and the number
/// `n_ℓ` of coded elements a TB carries, per expanding window.
///
/// An MCS of 0 marks a window without an assigned MCS; such a window must
/// not carry transmissions unless the plan was built from element
/// capacities alone (coding experiments).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransmissionPlan {
    pub mcs: Vec<u8>,
    pub tbs: Vec<usize>,
    pub capacity: Vec<usize>,
}

impl TransmissionPlan {
    pub fn new(mcs: Vec<u8>, tbs: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        if mcs.len() != tbs.len() || tbs.len() != capacity.len() {
            return Err(Error::InvalidPlan(format!(
                "length mismatch: mcs={}, tbs={}, capacity={}",
                mcs.len(),
                tbs.len(),
                capacity.len()
            )));
        }
        if let Some(m) = mcs.iter().find(|&&m| m != 0 && !(4..=15).contains(&m)) {
            return Err(Error::InvalidPlan(format!("MCS {m} outside {{0}} ∪ [4, 15]")));
        }
        Ok(Self { mcs, tbs, capacity })
    }

    /// Plan without MCS information: TB counts and per-TB capacities only.
    pub fn from_capacity(tbs: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        let l = tbs.len();
        Self::new(vec![0; l], tbs, capacity)
    }

    /// Every window gets `tbs` TBs of `capacity` elements.
    pub fn uniform(layers: usize, tbs: usize, capacity: usize) -> Self {
        Self { mcs: vec![0; layers], tbs: vec![tbs; layers], capacity: vec![capacity; layers] }
    }

    /// Plan with every window silent.
    pub fn empty(layers: usize) -> Self {
        Self::uniform(layers, 0, 0)
    }

    pub fn layers(&self) -> usize {
        self.tbs.len()
    }

    pub fn total_tbs(&self) -> usize {
        self.tbs.iter().sum()
    }

    pub(crate) fn check_against(&self, layers: &LayerConfig) -> Result<()> {
        if self.layers() != layers.count() {
            return Err(Error::InvalidPlan(format!(
                "plan has {} windows, message has {} layers",
                self.layers(),
                layers.count()
            )));
        }
        Ok(())
    }
}
