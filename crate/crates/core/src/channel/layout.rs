//! Hexagonal multi-site layout and downlink SINR.
//!
//! 19 three-sector sites on a hexagonal grid. Pathloss follows the urban
//! macro form `PL = 128.1 + 37.6 log10(d_km)` (2 GHz carrier) and sectors
//! use the parabolic horizontal pattern `−min(12 (θ/θ3dB)², A_m)`. These are
//! parametric stand-ins for the usual system-level calibration tables.

use serde::{Deserialize, Serialize};

/// Position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle_deg: f64) -> Self {
        let a = angle_deg.to_radians();
        Self::new(radius * a.cos(), radius * a.sin())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from `self` towards `other`, degrees in (−180, 180].
    pub fn bearing_to(&self, other: &Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x).to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeliveryMode {
    /// One sector serves; every other site interferes.
    #[default]
    SingleCell,
    /// A set of sites transmits the same signal and combines constructively.
    Sfn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Antenna {
    Omni,
    Sector { boresight_deg: f64 },
}

/// Contribution of a transmitter to a user's SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxRole {
    Signal,
    Interference,
    /// Co-sited sectors outside the service area.
    Silent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub site: usize,
    pub position: Point,
    pub antenna: Antenna,
    pub role: TxRole,
}

/// Propagation and receiver parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Propagation {
    pub tx_power_dbm: f64,
    pub bs_antenna_gain_dbi: f64,
    pub ue_antenna_gain_dbi: f64,
    pub penetration_loss_db: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_slope_db: f64,
    pub beamwidth_deg: f64,
    pub front_to_back_db: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    /// Distances are floored here (meters).
    pub min_distance_m: f64,
}

impl Default for Propagation {
    fn default() -> Self {
        Self {
            tx_power_dbm: 46.0,
            bs_antenna_gain_dbi: 14.0,
            ue_antenna_gain_dbi: 0.0,
            penetration_loss_db: 20.0,
            pathloss_intercept_db: 128.1,
            pathloss_slope_db: 37.6,
            beamwidth_deg: 70.0,
            front_to_back_db: 20.0,
            noise_figure_db: 9.0,
            bandwidth_hz: 20e6,
            min_distance_m: 35.0,
        }
    }
}

impl Propagation {
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.min_distance_m) / 1000.0;
        self.pathloss_intercept_db + self.pathloss_slope_db * d.log10()
    }

    pub fn antenna_gain_db(&self, antenna: Antenna, bearing_deg: f64) -> f64 {
        match antenna {
            Antenna::Omni => 0.0,
            Antenna::Sector { boresight_deg } => {
                let theta = wrap_deg(bearing_deg - boresight_deg);
                -(12.0 * (theta / self.beamwidth_deg).powi(2)).min(self.front_to_back_db)
            }
        }
    }

    pub fn noise_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

fn wrap_deg(a: f64) -> f64 {
    let mut a = a % 360.0;
    if a > 180.0 {
        a -= 360.0;
    } else if a <= -180.0 {
        a += 360.0;
    }
    a
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Sector boresights of every site; sector 0 points along +x.
pub const SECTOR_BORESIGHTS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

/// Sites of a two-ring hexagonal grid: centre, 6 at `isd`, 12 in ring two.
pub fn hex_sites(isd: f64) -> Vec<Point> {
    let mut sites = vec![Point::new(0.0, 0.0)];
    for k in 0..6 {
        sites.push(Point::polar(isd, 30.0 + 60.0 * k as f64));
    }
    for k in 0..6 {
        sites.push(Point::polar(2.0 * isd, 30.0 + 60.0 * k as f64));
        sites.push(Point::polar(3f64.sqrt() * isd, 60.0 * (k + 1) as f64));
    }
    sites
}

/// Sites forming the default SFN: the centre and every other first-ring
/// neighbour, so that the 15 remaining sites surround it.
pub const SFN_SITES: [usize; 4] = [0, 1, 3, 5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub mode: DeliveryMode,
    pub sites: Vec<Point>,
    pub serving_sites: Vec<usize>,
    pub transmitters: Vec<Transmitter>,
    pub propagation: Propagation,
}

impl NetworkLayout {
    /// Sector 0 of the centre site serves; the 18 other sites interfere.
    pub fn single_cell(isd: f64, propagation: Propagation) -> Self {
        Self::sectorized(DeliveryMode::SingleCell, hex_sites(isd), vec![0], propagation)
    }

    /// Every sector of the [`SFN_SITES`] serves; the other 15 sites interfere.
    pub fn sfn(isd: f64, propagation: Propagation) -> Self {
        Self::sectorized(DeliveryMode::Sfn, hex_sites(isd), SFN_SITES.to_vec(), propagation)
    }

    fn sectorized(mode: DeliveryMode, sites: Vec<Point>, serving_sites: Vec<usize>, propagation: Propagation) -> Self {
        let mut transmitters = Vec::with_capacity(sites.len() * 3);
        for (s, &position) in sites.iter().enumerate() {
            for (sector, &boresight_deg) in SECTOR_BORESIGHTS_DEG.iter().enumerate() {
                let role = match (mode, serving_sites.contains(&s)) {
                    (_, false) => TxRole::Interference,
                    (DeliveryMode::Sfn, true) => TxRole::Signal,
                    (DeliveryMode::SingleCell, true) if sector == 0 => TxRole::Signal,
                    (DeliveryMode::SingleCell, true) => TxRole::Silent,
                };
                transmitters.push(Transmitter { site: s, position, antenna: Antenna::Sector { boresight_deg }, role });
            }
        }
        Self { mode, sites, serving_sites, transmitters, propagation }
    }

    /// Layout from explicit transmitters, e.g. omnidirectional test setups.
    pub fn custom(mode: DeliveryMode, transmitters: Vec<Transmitter>, propagation: Propagation) -> Self {
        let mut sites: Vec<Point> = Vec::new();
        let mut serving_sites = Vec::new();
        for t in &transmitters {
            if sites.len() <= t.site {
                sites.resize(t.site + 1, Point::default());
            }
            sites[t.site] = t.position;
            if t.role == TxRole::Signal && !serving_sites.contains(&t.site) {
                serving_sites.push(t.site);
            }
        }
        Self { mode, sites, serving_sites, transmitters, propagation }
    }

    /// Mean position of the serving sites.
    pub fn serving_centroid(&self) -> Point {
        let n = self.serving_sites.len().max(1) as f64;
        let (x, y) = self.serving_sites.iter().map(|&s| self.sites[s]).fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        Point::new(x / n, y / n)
    }

    /// Boresight of the first serving sector, 0° for omni layouts.
    pub fn serving_axis_deg(&self) -> f64 {
        self.transmitters.iter().find(|t| t.role == TxRole::Signal).map_or(0.0, |t| match t.antenna {
            Antenna::Sector { boresight_deg } => boresight_deg,
            Antenna::Omni => 0.0,
        })
    }

    pub fn received_power_dbm(&self, tx: &Transmitter, at: &Point) -> f64 {
        let p = &self.propagation;
        p.tx_power_dbm + p.bs_antenna_gain_dbi + p.ue_antenna_gain_dbi - p.penetration_loss_db
            + p.antenna_gain_db(tx.antenna, tx.position.bearing_to(at))
            - p.pathloss_db(tx.position.distance(at))
    }

    /// Total signal and interference power (mW), with optional per-site
    /// shadowing offsets in dB.
    pub fn powers_mw(&self, at: &Point, shadowing_db: Option<&[f64]>) -> (f64, f64) {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for tx in &self.transmitters {
            let shadow = shadowing_db.map_or(0.0, |s| s[tx.site]);
            let mw = dbm_to_mw(self.received_power_dbm(tx, at) - shadow);
            match tx.role {
                TxRole::Signal => signal += mw,
                TxRole::Interference => interference += mw,
                TxRole::Silent => {}
            }
        }
        (signal, interference)
    }

    pub fn signal_power_dbm(&self, at: &Point) -> f64 {
        mw_to_dbm(self.powers_mw(at, None).0)
    }

    /// Downlink SINR in dB.
    pub fn sinr_at(&self, at: &Point) -> f64 {
        self.sinr_with_shadowing(at, None)
    }

    pub fn sinr_with_shadowing(&self, at: &Point, shadowing_db: Option<&[f64]>) -> f64 {
        let (s, i) = self.powers_mw(at, shadowing_db);
        let noise = dbm_to_mw(self.propagation.noise_dbm());
        mw_to_dbm(s) - mw_to_dbm(i + noise)
    }
}
