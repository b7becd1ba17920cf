//! Level-wise trip construction under distance and time budgets.

use serde::{Deserialize, Serialize};

use crate::data::{hour_of_day, PoiId, UserId};
use crate::features::FeatureTables;
use crate::generate::advance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriConfig {
    /// Longest allowed hop between consecutive POIs.
    pub epsilon_km: f64,
    /// Longest allowed trip (stays plus travel), seconds.
    pub budget_secs: f64,
    /// Candidates kept per level; `None` keeps all of them.
    pub beam: Option<usize>,
}

impl Default for AprioriConfig {
    fn default() -> Self {
        AprioriConfig { epsilon_km: 2.0, budget_secs: 8.0 * 3600.0, beam: Some(100) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trip {
    pub pois: Vec<PoiId>,
    pub arrivals: Vec<i64>,
    /// Sum of constraint-discounted preference scores.
    pub score: f64,
    pub travel_secs: f64,
    /// Stays at all but the last POI plus travel.
    pub trip_secs: f64,
}

/// Higher score first, then shorter travel, then lexicographic POIs.
pub fn trip_order(a: &Trip, b: &Trip) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then(a.travel_secs.total_cmp(&b.travel_secs)).then_with(|| a.pois.cmp(&b.pois))
}

/// Trips of up to `length` POIs from `start`; returns the best `k` of the
/// longest level reached.
pub fn apriori_generate(
    tables: &FeatureTables,
    user: Option<UserId>,
    start: PoiId,
    start_time: i64,
    length: usize,
    cfg: &AprioriConfig,
    k: usize,
) -> Vec<Trip> {
    let first = Trip {
        pois: vec![start],
        arrivals: vec![start_time],
        score: tables.consolidated(user, start, hour_of_day(start_time), None),
        travel_secs: 0.0,
        trip_secs: 0.0,
    };
    let mut level = vec![first];
    let n = tables.num_pois();
    while level[0].pois.len() < length {
        let mut next = Vec::new();
        for trip in &level {
            let last = *trip.pois.last().expect("non-empty");
            let t_last = *trip.arrivals.last().expect("non-empty");
            for c in (0..n).map(PoiId::from) {
                if trip.pois.contains(&c) || tables.distance_km(last, c) > cfg.epsilon_km {
                    continue;
                }
                let travel = tables.travel_secs(last, c);
                let trip_secs = trip.trip_secs + tables.stay.seconds(last) + travel;
                if trip_secs > cfg.budget_secs {
                    continue;
                }
                let arrival = advance(tables, t_last, last, c);
                let mut pois = trip.pois.clone();
                pois.push(c);
                let mut arrivals = trip.arrivals.clone();
                arrivals.push(arrival);
                next.push(Trip {
                    score: trip.score + tables.consolidated(user, c, hour_of_day(arrival), Some(last)),
                    travel_secs: trip.travel_secs + travel,
                    trip_secs,
                    pois,
                    arrivals,
                });
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(trip_order);
        if let Some(beam) = cfg.beam {
            next.truncate(beam.max(1));
        }
        level = next;
    }
    level.sort_by(trip_order);
    level.truncate(k.max(1));
    level
}
