//! Hub and authority scores of users and places within regions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::data::{PoiId, PoiInfo, Session, UserId};
use crate::geo::haversine_km;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitsConfig {
    pub radius_km: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HitsConfig {
    fn default() -> Self {
        HitsConfig { radius_km: 10.0, tolerance: 1e-8, max_iterations: 100 }
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Hub (row) and authority (column) scores of a non-negative matrix by
/// alternating power iteration from all-ones vectors. Returns
/// `(hub, authority, iterations)`.
pub fn power_iteration(adj: &[Vec<f64>], tolerance: f64, max_iterations: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let rows = adj.len();
    let cols = adj.first().map_or(0, Vec::len);
    let mut hub = vec![1.0; rows];
    let mut auth = vec![1.0; cols];
    normalize(&mut hub);
    normalize(&mut auth);
    for it in 1..=max_iterations {
        let mut a = vec![0.0; cols];
        for (r, row) in adj.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                a[c] += x * hub[r];
            }
        }
        normalize(&mut a);
        let mut h: Vec<f64> = adj.iter().map(|row| row.iter().zip(&a).map(|(x, y)| x * y).sum()).collect();
        normalize(&mut h);
        let change = a.iter().zip(&auth).chain(h.iter().zip(&hub)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        auth = a;
        hub = h;
        if change < tolerance {
            return (hub, auth, it);
        }
    }
    (hub, auth, max_iterations)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub leader: PoiId,
    pub pois: Vec<PoiId>,
    pub users: Vec<UserId>,
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hits {
    pub regions: Vec<Region>,
    pub region_of: Vec<usize>,
    /// Authority of each POI within its own region.
    pub authority: Vec<f64>,
    /// Hub score of each user per region.
    hubs: Vec<BTreeMap<UserId, f64>>,
    /// Users who visited each POI.
    visitors: Vec<BTreeSet<UserId>>,
    /// Observed sessions as POI lists.
    paths: Vec<Vec<PoiId>>,
}

/// Assign each POI, in index order, to the first leader within `radius_km`,
/// or make it a new leader.
pub fn leader_clusters(pois: &[PoiInfo], radius_km: f64) -> (Vec<PoiId>, Vec<usize>) {
    let mut leaders: Vec<PoiId> = Vec::new();
    let mut region_of = Vec::with_capacity(pois.len());
    for (i, p) in pois.iter().enumerate() {
        let found = leaders.iter().position(|l| {
            let q = &pois[l.index()];
            haversine_km(p.lat, p.lon, q.lat, q.lon) <= radius_km
        });
        match found {
            Some(r) => region_of.push(r),
            None => {
                leaders.push(PoiId::from(i));
                region_of.push(leaders.len() - 1);
            }
        }
    }
    (leaders, region_of)
}

impl Hits {
    pub fn fit(sessions: &[Session], pois: &[PoiInfo], cfg: &HitsConfig) -> Hits {
        let (leaders, region_of) = leader_clusters(pois, cfg.radius_km);
        let mut counts: Vec<BTreeMap<(UserId, PoiId), f64>> = vec![BTreeMap::new(); leaders.len()];
        let mut visitors = vec![BTreeSet::new(); pois.len()];
        for s in sessions {
            for v in &s.visits {
                *counts[region_of[v.poi.index()]].entry((s.user, v.poi)).or_default() += 1.0;
                visitors[v.poi.index()].insert(s.user);
            }
        }
        let mut authority = vec![0.0; pois.len()];
        let mut hubs = Vec::with_capacity(leaders.len());
        let mut regions = Vec::with_capacity(leaders.len());
        for (r, leader) in leaders.into_iter().enumerate() {
            let region_pois: Vec<PoiId> = (0..pois.len()).filter(|&i| region_of[i] == r).map(PoiId::from).collect();
            let users: Vec<UserId> = counts[r].keys().map(|k| k.0).collect::<BTreeSet<_>>().into_iter().collect();
            if users.is_empty() {
                log::debug!("region {r} has no visits");
            }
            let col: BTreeMap<PoiId, usize> = region_pois.iter().enumerate().map(|(i, &p)| (p, i)).collect();
            let row: BTreeMap<UserId, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
            let mut adj = vec![vec![0.0; region_pois.len()]; users.len()];
            for (&(u, p), &n) in &counts[r] {
                adj[row[&u]][col[&p]] = n;
            }
            let (hub, auth, _) = power_iteration(&adj, cfg.tolerance, cfg.max_iterations);
            for (p, a) in region_pois.iter().zip(&auth) {
                authority[p.index()] = *a;
            }
            hubs.push(users.iter().copied().zip(hub.iter().copied()).collect());
            regions.push(Region { leader, pois: region_pois, users, hub, authority: auth });
        }
        let paths = sessions.iter().map(|s| s.pois().collect()).collect();
        Hits { regions, region_of, authority, hubs, visitors, paths }
    }

    /// Summed authority times the mean hub of users who visited both ends
    /// of some consecutive pair.
    pub fn score(&self, seq: &[PoiId]) -> f64 {
        let auth: f64 = seq.iter().map(|p| self.authority[p.index()]).sum();
        let mut users: BTreeMap<UserId, f64> = BTreeMap::new();
        for w in seq.windows(2) {
            let region = self.region_of[w[0].index()];
            for u in self.visitors[w[0].index()].intersection(&self.visitors[w[1].index()]) {
                users.entry(*u).or_insert_with(|| self.hubs[region].get(u).copied().unwrap_or(0.0));
            }
        }
        if users.is_empty() {
            return 0.0;
        }
        auth * users.values().sum::<f64>() / users.len() as f64
    }

    /// Observed windows of `length` starting at `start`, deduplicated in
    /// first-seen order. When none exist the longest observed prefix is
    /// extended with the region's highest-authority places.
    pub fn candidates(&self, start: PoiId, length: usize) -> Vec<Vec<PoiId>> {
        let mut out: Vec<Vec<PoiId>> = Vec::new();
        let mut longest: Vec<PoiId> = vec![start];
        for path in &self.paths {
            for (i, _) in path.iter().enumerate().filter(|(_, p)| **p == start) {
                let end = (i + length).min(path.len());
                let w = &path[i..end];
                if w.len() == length {
                    if !out.iter().any(|o| o == w) {
                        out.push(w.to_vec());
                    }
                } else if w.len() > longest.len() {
                    longest = w.to_vec();
                }
            }
        }
        if out.is_empty() {
            let region = &self.regions[self.region_of[start.index()]];
            let mut ranked: Vec<PoiId> = region.pois.clone();
            ranked.sort_by(|a, b| self.authority[b.index()].total_cmp(&self.authority[a.index()]).then(a.cmp(b)));
            let mut seq = longest;
            for p in ranked {
                if seq.len() >= length {
                    break;
                }
                if !seq.contains(&p) {
                    seq.push(p);
                }
            }
            seq.truncate(length.max(1));
            while seq.len() < length {
                seq.push(*seq.last().expect("non-empty"));
            }
            out.push(seq);
        }
        out
    }

    /// Best `k` candidates by score, ties to earlier candidates.
    pub fn rank(&self, start: PoiId, length: usize, k: usize) -> Vec<(Vec<PoiId>, f64)> {
        let mut scored: Vec<(usize, Vec<PoiId>, f64)> = self
            .candidates(start, length)
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let s = self.score(&c);
                (i, c, s)
            })
            .collect();
        scored.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        scored.into_iter().take(k.max(1)).map(|(_, c, s)| (c, s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_location_has_top_authority() {
        // every user visits place 0, each also visits one other place
        let adj = vec![vec![1.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]];
        let (hub, auth, _) = power_iteration(&adj, 1e-12, 200);
        assert!(auth[0] > auth[1] && auth[0] > auth[2] && auth[0] > auth[3]);
        assert!((auth.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(hub.iter().all(|&h| h >= 0.0));
    }

    #[test]
    fn single_location_region() {
        let (_, auth, _) = power_iteration(&[vec![3.0], vec![1.0]], 1e-8, 100);
        assert!((auth[0] - 1.0).abs() < 1e-12);
    }
}
