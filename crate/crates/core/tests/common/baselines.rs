//! Exhaustive and closed-form references for the baselines.

use caps::baselines::{trip_order, AprioriConfig, Hits, HitsConfig, Trip};
use caps::data::{hour_of_day, Dataset, PoiId, UserId};
use caps::features::{FeatureConfig, FeatureTables};
use caps::generate::advance;
use caps::numerics::seeded;

use super::random_dataset;

/// Every simple path from `start` that respects the hop and time limits.
pub fn enumerate(t: &FeatureTables, user: Option<UserId>, cfg: &AprioriConfig, trip: Trip, length: usize, out: &mut Vec<Trip>) {
    out.push(trip.clone());
    if trip.pois.len() == length {
        return;
    }
    let last = *trip.pois.last().unwrap();
    let t_last = *trip.arrivals.last().unwrap();
    for c in 0..t.num_pois() {
        let c = PoiId(c as u32);
        if trip.pois.contains(&c) || t.distance_km(last, c) > cfg.epsilon_km {
            continue;
        }
        let travel = t.travel_secs(last, c);
        let trip_secs = trip.trip_secs + t.stay.seconds(last) + travel;
        if trip_secs > cfg.budget_secs {
            continue;
        }
        let arrival = advance(t, t_last, last, c);
        let mut next = trip.clone();
        next.pois.push(c);
        next.arrivals.push(arrival);
        next.score += t.consolidated(user, c, hour_of_day(arrival), Some(last));
        next.travel_secs += travel;
        next.trip_secs = trip_secs;
        enumerate(t, user, cfg, next, length, out);
    }
}

pub fn brute_force(t: &FeatureTables, user: Option<UserId>, start: PoiId, time: i64, length: usize, cfg: &AprioriConfig, k: usize) -> Vec<Trip> {
    let first = Trip {
        pois: vec![start],
        arrivals: vec![time],
        score: t.consolidated(user, start, hour_of_day(time), None),
        travel_secs: 0.0,
        trip_secs: 0.0,
    };
    let mut all = Vec::new();
    enumerate(t, user, cfg, first, length, &mut all);
    let longest = all.iter().map(|t| t.pois.len()).max().unwrap();
    let mut best: Vec<Trip> = all.into_iter().filter(|t| t.pois.len() == longest).collect();
    best.sort_by(trip_order);
    best.truncate(k);
    best
}

pub fn small_instance(seed: u64) -> (Dataset, FeatureTables) {
    let mut rng = seeded(seed);
    let mut data = random_dataset(&mut rng, 30, true);
    data.pois.truncate(6);
    let n = data.pois.len() as u32;
    for s in &mut data.sessions {
        for v in &mut s.visits {
            v.poi = PoiId(v.poi.0 % n);
        }
    }
    let tables = FeatureTables::build(&data, &FeatureConfig::default());
    (data, tables)
}

/// `a_k ~ (A^T A)^(k-1) A^T 1` and `h_k ~ A a_k`, each unit length.
pub fn gram_oracle(adj: &[Vec<f64>], steps: usize) -> (Vec<f64>, Vec<f64>) {
    let rows = adj.len();
    let cols = adj[0].len();
    let unit = |v: Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 { v.iter().map(|x| x / n).collect() } else { v }
    };
    let gram: Vec<Vec<f64>> = (0..cols)
        .map(|i| (0..cols).map(|j| (0..rows).map(|r| adj[r][i] * adj[r][j]).sum()).collect())
        .collect();
    let mut a = unit((0..cols).map(|c| (0..rows).map(|r| adj[r][c]).sum()).collect());
    for _ in 1..steps {
        a = unit((0..cols).map(|i| (0..cols).map(|j| gram[i][j] * a[j]).sum()).collect());
    }
    let h = unit((0..rows).map(|r| (0..cols).map(|c| adj[r][c] * a[c]).sum()).collect());
    (h, a)
}

/// Panics unless every fitted region matches the Gram-matrix oracle.
pub fn check_hits_regions(seed: u64, datasets: usize) {
    let mut rng = seeded(seed);
    for _ in 0..datasets {
        let data = random_dataset(&mut rng, 50, false);
        let cfg = HitsConfig { tolerance: 0.0, max_iterations: 100, ..HitsConfig::default() };
        let hits = Hits::fit(&data.sessions, &data.pois, &cfg);
        for region in &hits.regions {
            if region.users.is_empty() {
                continue;
            }
            let adj: Vec<Vec<f64>> = region
                .users
                .iter()
                .map(|&u| {
                    region
                        .pois
                        .iter()
                        .map(|&p| {
                            data.sessions.iter().filter(|s| s.user == u).flat_map(|s| s.pois()).filter(|&q| q == p).count() as f64
                        })
                        .collect()
                })
                .collect();
            let (hub, auth) = gram_oracle(&adj, 100);
            for (a, b) in region.authority.iter().zip(&auth).chain(region.hub.iter().zip(&hub)) {
                assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
            }
        }
    }
}
