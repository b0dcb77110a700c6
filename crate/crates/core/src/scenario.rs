//! Scenario files (TOML). Every section has defaults, so a file only needs
//! the fields it changes.
//!
//! ```toml
//! name = "stream-a-sc"
//!
//! [network]
//! mode = "single-cell"   # or "sfn"
//! isd_m = 500.0
//!
//! [stream]
//! bitrate_kbps = [47.3, 326.1, 1396.7]
//! psnr_db = [27.9, 35.9, 45.8]
//! t_hat = [0.99, 0.8, 0.6]
//!
//! [radio]
//! n_rbp = 5
//!
//! [users]
//! kind = "radial"
//! count = 80
//! start = 90.0
//! step = 2.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocators::{AllocationProblem, DirectConfig};
use crate::channel::layout::{DeliveryMode, NetworkLayout, Propagation};
use crate::channel::link::{BlerModel, ErasureView, UserContext};
use crate::channel::radio::RadioConfig;
use crate::channel::users::{place_users, Shadowing, UserPattern};
use crate::error::{Error, Result};
use crate::layers::LayerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub mode: DeliveryMode,
    pub isd_m: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { mode: DeliveryMode::SingleCell, isd_m: 500.0 }
    }
}

/// Layered stream; rates in kbps (1000 b/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamSection {
    pub bitrate_kbps: Vec<f64>,
    pub psnr_db: Vec<f64>,
    pub t_hat: Vec<f64>,
}

impl StreamSection {
    pub fn stream_a() -> Self {
        Self { bitrate_kbps: vec![47.3, 326.1, 1396.7], psnr_db: vec![27.9, 35.9, 45.8], t_hat: vec![0.99, 0.8, 0.6] }
    }

    pub fn stream_b() -> Self {
        Self {
            bitrate_kbps: vec![36.8, 79.4, 303.4, 835.9],
            psnr_db: vec![28.1, 33.4, 39.9, 46.4],
            t_hat: vec![0.99, 0.9, 0.75, 0.6],
        }
    }
}

impl Default for StreamSection {
    fn default() -> Self {
        Self::stream_a()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocationSection {
    pub q_hat: f64,
    /// RBP counts visited by the sweep.
    pub rbp_sweep: Vec<usize>,
    /// Explicit per-window TB budgets, replacing the derived ones.
    pub n_hat: Option<Vec<usize>>,
    pub direct: DirectConfig,
    /// Erasure model used when scoring users after allocation.
    pub erasure_view: ErasureView,
}

impl Default for AllocationSection {
    fn default() -> Self {
        Self {
            q_hat: 0.99,
            rbp_sweep: (1..=10).collect(),
            n_hat: None,
            direct: DirectConfig::default(),
            erasure_view: ErasureView::Evaluation,
        }
    }
}

/// Settings of the analytic-versus-simulation comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSection {
    /// Cumulative window sizes `K_ℓ`.
    pub cumulative: Vec<usize>,
    pub capacities: Vec<usize>,
    pub erasures: Vec<f64>,
    pub trials: u64,
    /// The sweep over `t` stops once every window is within this of 1.
    pub saturation: f64,
    pub t_max: usize,
    pub t_step: usize,
}

impl Default for ValidationSection {
    fn default() -> Self {
        Self {
            cumulative: vec![10, 50, 100],
            capacities: vec![2, 5],
            erasures: vec![0.1, 0.4],
            trials: 100_000,
            saturation: 1e-4,
            t_max: 400,
            t_step: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub network: NetworkSection,
    pub propagation: Propagation,
    pub stream: StreamSection,
    pub radio: RadioConfig,
    pub bler: BlerModel,
    pub users: UserPattern,
    pub shadowing: Option<Shadowing>,
    pub allocation: AllocationSection,
    pub validation: ValidationSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 1,
            network: NetworkSection::default(),
            propagation: Propagation::default(),
            stream: StreamSection::default(),
            radio: RadioConfig::default(),
            bler: BlerModel::default(),
            users: UserPattern::Radial { count: 80, start: 90.0, step: 2.0 },
            shadowing: None,
            allocation: AllocationSection::default(),
            validation: ValidationSection::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// SHA-256 of the canonical serialisation, hex encoded.
    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.stream;
        let l = s.bitrate_kbps.len();
        if l == 0 || s.psnr_db.len() != l || s.t_hat.len() != l {
            return Err(Error::Scenario(format!(
                "stream needs matching non-empty bitrate/psnr/t_hat lists, got {}/{}/{}",
                l,
                s.psnr_db.len(),
                s.t_hat.len()
            )));
        }
        if let Some(n) = &self.allocation.n_hat {
            if n.len() != l {
                return Err(Error::Scenario(format!("{} budgets for {l} layers", n.len())));
            }
        }
        if self.network.isd_m <= 0.0 {
            return Err(Error::Scenario("isd_m must be positive".into()));
        }
        Ok(())
    }

    pub fn layout(&self) -> NetworkLayout {
        match self.network.mode {
            DeliveryMode::SingleCell => NetworkLayout::single_cell(self.network.isd_m, self.propagation.clone()),
            DeliveryMode::Sfn => NetworkLayout::sfn(self.network.isd_m, self.propagation.clone()),
        }
    }

    pub fn place_users(&self) -> Result<Vec<UserContext>> {
        place_users(&self.layout(), &self.users, &self.bler, self.shadowing.as_ref())
    }

    /// Layers for `radio`, whose element size and GoP fix the `k_ℓ`.
    pub fn layers(&self, radio: &RadioConfig) -> Result<LayerConfig> {
        let s = &self.stream;
        let bits: Vec<f64> = s.bitrate_kbps.iter().map(|b| b * 1000.0).collect();
        let k = bits.iter().map(|&b| radio.layer_elements(b)).collect::<Result<Vec<_>>>()?;
        LayerConfig::new(k, bits, s.psnr_db.clone(), s.t_hat.clone())
    }

    /// Allocation problem for the given users and RBP count.
    pub fn problem(&self, users: &[UserContext], n_rbp: usize) -> Result<AllocationProblem> {
        let radio = RadioConfig { p_hat: self.bler.p_hat, ..self.radio.clone() }.with_rbp(n_rbp);
        let layers = self.layers(&radio)?;
        let mcs = users.iter().map(|u| u.mcs_feedback).collect();
        match &self.allocation.n_hat {
            Some(n_hat) => AllocationProblem::with_budgets(layers, mcs, radio, self.allocation.q_hat, n_hat.clone()),
            None => AllocationProblem::new(layers, mcs, radio, self.allocation.q_hat),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let s = Scenario::default();
        let text = s.to_toml().unwrap();
        let back = Scenario::from_toml(&text).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.digest().unwrap(), back.digest().unwrap());
        assert_eq!(s.digest().unwrap().len(), 64);
    }

    #[test]
    fn partial_file() {
        let s = Scenario::from_toml(
            r#"
            name = "b-sfn"
            [network]
            mode = "sfn"
            [stream]
            bitrate_kbps = [36.8, 79.4, 303.4, 835.9]
            psnr_db = [28.1, 33.4, 39.9, 46.4]
            t_hat = [0.99, 0.9, 0.75, 0.6]
            [users]
            kind = "grid"
            count = 100
            step = 20.0
            "#,
        )
        .unwrap();
        assert_eq!(s.network.mode, DeliveryMode::Sfn);
        assert_eq!(s.stream, StreamSection::stream_b());
        assert_eq!(s.users, UserPattern::Grid { count: 100, step: 20.0 });
        assert_eq!(s.radio, RadioConfig::default());
        assert_ne!(s.digest().unwrap(), Scenario::default().digest().unwrap());
    }

    #[test]
    fn rejects_inconsistent_files() {
        assert!(Scenario::from_toml("[stream]\nbitrate_kbps = [1.0]\npsnr_db = []\nt_hat = [0.5]").is_err());
        assert!(Scenario::from_toml("unknown = 3").is_err());
        assert!(Scenario::from_toml("[network]\nisd_m = -1.0").is_err());
    }

    #[test]
    fn stream_a_elements() {
        let s = Scenario::default();
        let layers = s.layers(&s.radio).unwrap();
        assert_eq!(layers.sizes(), &[2, 11, 46]);
    }
}
