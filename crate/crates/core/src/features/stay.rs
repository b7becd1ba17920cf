//! Average stay time per location.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{PoiId, Session, UserId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StayStats {
    /// Mean over visiting users of each user's mean stay, in seconds.
    pub mean_secs: Vec<f64>,
    /// Min-max normalised `mean_secs` in [0, 1].
    pub normalized: Vec<f64>,
    /// Locations with no visits; they carry the global mean.
    pub unvisited: Vec<bool>,
}

impl StayStats {
    pub fn compute(sessions: &[Session], num_pois: usize) -> StayStats {
        let mut per_user: BTreeMap<(PoiId, UserId), (f64, u32)> = BTreeMap::new();
        for s in sessions {
            for v in &s.visits {
                let e = per_user.entry((v.poi, s.user)).or_insert((0.0, 0));
                e.0 += v.stay() as f64;
                e.1 += 1;
            }
        }
        let mut sum = vec![0.0; num_pois];
        let mut users = vec![0u32; num_pois];
        for (&(poi, _), &(total, n)) in &per_user {
            sum[poi.index()] += total / n as f64;
            users[poi.index()] += 1;
        }
        let unvisited: Vec<bool> = users.iter().map(|&n| n == 0).collect();
        let mut mean_secs: Vec<f64> = sum.iter().zip(&users).map(|(s, &n)| if n > 0 { s / n as f64 } else { 0.0 }).collect();
        let visited: Vec<f64> = mean_secs.iter().zip(&unvisited).filter(|(_, &u)| !u).map(|(m, _)| *m).collect();
        if visited.len() < num_pois {
            let global = if visited.is_empty() { 0.0 } else { visited.iter().sum::<f64>() / visited.len() as f64 };
            if !visited.is_empty() {
                log::warn!("{} locations have no visits; using global mean stay {global:.0}s", num_pois - visited.len());
            }
            for (m, &u) in mean_secs.iter_mut().zip(&unvisited) {
                if u {
                    *m = global;
                }
            }
        }
        let normalized = min_max(&mean_secs);
        StayStats { mean_secs, normalized, unvisited }
    }

    pub fn seconds(&self, poi: PoiId) -> f64 {
        self.mean_secs[poi.index()]
    }

    pub fn norm(&self, poi: PoiId) -> f64 {
        self.normalized[poi.index()]
    }
}

/// Min-max scaling to [0, 1]; a constant input maps to all zeros.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}
