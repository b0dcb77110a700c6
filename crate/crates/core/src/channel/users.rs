//! Deterministic user placement and optional lognormal shadowing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::layout::{NetworkLayout, Point};
use super::link::{BlerModel, UserContext};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UserPattern {
    /// `count` users on the serving sector's boresight, `start` meters from
    /// the serving site and `step` meters apart.
    Radial { count: usize, start: f64, step: f64 },
    /// The `count` vertices of a square grid with spacing `step` that lie
    /// closest to the centroid of the serving sites, among those whose
    /// nearest site is a serving one.
    Grid { count: usize, step: f64 },
}

impl UserPattern {
    pub fn count(&self) -> usize {
        match *self {
            UserPattern::Radial { count, .. } | UserPattern::Grid { count, .. } => count,
        }
    }
}

/// Independent per-site shadowing offsets, drawn once per user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shadowing {
    pub sigma_db: f64,
    pub seed: u64,
}

pub fn user_positions(layout: &NetworkLayout, pattern: &UserPattern) -> Result<Vec<Point>> {
    match *pattern {
        UserPattern::Radial { count, start, step } => {
            if !(start >= 0.0 && step > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "radial pattern needs start >= 0 and step > 0, got {start}, {step}"
                )));
            }
            let origin = layout.sites[*layout.serving_sites.first().unwrap_or(&0)];
            let axis = layout.serving_axis_deg();
            Ok((0..count)
                .map(|i| {
                    let p = Point::polar(start + step * i as f64, axis);
                    Point::new(origin.x + p.x, origin.y + p.y)
                })
                .collect())
        }
        UserPattern::Grid { count, step } => {
            if step <= 0.0 || !step.is_finite() {
                return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
            }
            let c = layout.serving_centroid();
            // Smallest square that is guaranteed to hold `count` vertices
            // within its inscribed disc.
            let served = |p: &Point| {
                let nearest = layout
                    .sites
                    .iter()
                    .enumerate()
                    .min_by(|a, b| p.distance(a.1).total_cmp(&p.distance(b.1)))
                    .map(|(i, _)| i);
                nearest.is_some_and(|i| layout.serving_sites.contains(&i))
            };
            let vertex = |(i, j): (i64, i64)| Point::new(c.x + step * i as f64, c.y + step * j as f64);
            // Grow the search square until enough served vertices exist.
            let mut half = ((count as f64 / std::f64::consts::PI).sqrt() + 2.0).ceil() as i64;
            loop {
                let mut cells: Vec<(i64, i64)> = (-half..=half)
                    .flat_map(|i| (-half..=half).map(move |j| (i, j)))
                    .filter(|&ij| served(&vertex(ij)))
                    .collect();
                // Only vertices inside the inscribed disc are ranked safely.
                cells.retain(|&(i, j)| i * i + j * j <= half * half);
                if cells.len() >= count {
                    cells.sort_by_key(|&(i, j)| (i * i + j * j, j, i));
                    return Ok(cells.into_iter().take(count).map(vertex).collect());
                }
                if half > 1 << 16 {
                    return Err(Error::InvalidParameter(format!("cannot fit {count} grid users in the serving area")));
                }
                half *= 2;
            }
        }
    }
}

/// Users of `pattern` with their SINR and CQI report.
pub fn place_users(
    layout: &NetworkLayout,
    pattern: &UserPattern,
    bler: &BlerModel,
    shadowing: Option<&Shadowing>,
) -> Result<Vec<UserContext>> {
    let positions = user_positions(layout, pattern)?;
    let Some(sh) = shadowing else {
        return Ok(positions.iter().map(|p| UserContext::new(*p, layout.sinr_at(p), bler)).collect());
    };
    let normal = Normal::new(0.0, sh.sigma_db)
        .map_err(|e| Error::InvalidParameter(format!("shadowing sigma {}: {e}", sh.sigma_db)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(sh.seed);
    let mut offsets = vec![0.0; layout.sites.len()];
    Ok(positions
        .iter()
        .map(|p| {
            offsets.iter_mut().for_each(|o| *o = normal.sample(&mut rng));
            UserContext::new(*p, layout.sinr_with_shadowing(p, Some(&offsets)), bler)
        })
        .collect())
}
