#![allow(dead_code)]

pub mod baselines;
pub mod features;
pub mod metrics;
pub mod pipeline;

use caps::data::{CategoryId, Dataset, Encodings, PoiId, PoiInfo, Session, SocialGraph, TravelTime, UserId, Visit};
use caps::geo::offset_km;
use rand::Rng;

/// Small random dataset: every user's visits form one or more sessions.
pub fn random_dataset<R: Rng>(rng: &mut R, max_checkins: usize, with_friends: bool) -> Dataset {
    let n_users = rng.gen_range(1..=5);
    let n_pois = rng.gen_range(2..=8);
    let n_cats = rng.gen_range(1..=3);
    let pois: Vec<PoiInfo> = (0..n_pois)
        .map(|_| {
            let (lat, lon) = offset_km(40.0, -74.0, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            PoiInfo { lat, lon, category: CategoryId(rng.gen_range(0..n_cats) as u32) }
        })
        .collect();
    let total = rng.gen_range(n_users..=max_checkins.max(n_users));
    let mut per_user = vec![0usize; n_users];
    for i in 0..total {
        per_user[if i < n_users { i } else { rng.gen_range(0..n_users) }] += 1;
    }
    // a user may end up with no visits at all
    if n_users > 1 && rng.gen_bool(0.2) {
        per_user[n_users - 1] = 0;
    }
    let mut sessions = Vec::new();
    for (u, &n) in per_user.iter().enumerate() {
        let mut t = 1_600_000_000 + rng.gen_range(0..86_400);
        let mut visits = Vec::new();
        for _ in 0..n {
            let stay = rng.gen_range(0..7200);
            visits.push(Visit { poi: PoiId(rng.gen_range(0..n_pois) as u32), arrival: t, departure: t + stay });
            t += stay + rng.gen_range(60..20_000);
            if visits.len() >= 2 && rng.gen_bool(0.3) {
                sessions.push(Session::new(UserId(u as u32), std::mem::take(&mut visits)));
            }
        }
        if !visits.is_empty() {
            sessions.push(Session::new(UserId(u as u32), visits));
        }
    }
    let mut edges = Vec::new();
    if with_friends {
        for a in 0..n_users {
            for b in a + 1..n_users {
                if rng.gen_bool(0.4) {
                    edges.push((UserId(a as u32), UserId(b as u32)));
                }
            }
        }
    }
    Dataset {
        encodings: Encodings::from_lists(
            (0..n_users).map(|u| format!("u{u}")).collect(),
            (0..n_pois).map(|p| format!("p{p}")).collect(),
            (0..n_cats).map(|c| format!("c{c}")).collect(),
        ),
        pois,
        sessions,
        social: SocialGraph::from_edges(n_users, edges),
        travel: TravelTime::Walking { speed_kmh: 5.0 },
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}
