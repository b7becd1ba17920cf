use serde::{Deserialize, Serialize};

use super::{PoiId, PoiInfo};
use crate::geo::haversine_km;

/// Stay assigned to a user's final visit when no other stay is observed.
pub const FALLBACK_STAY_SECS: i64 = 30 * 60;

/// A check-in with derived arrival and departure times (UTC seconds).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    pub poi: PoiId,
    pub arrival: i64,
    pub departure: i64,
}

impl Visit {
    pub fn stay(&self) -> i64 {
        self.departure - self.arrival
    }

    pub fn hour(&self) -> usize {
        hour_of_day(self.arrival)
    }
}

/// UTC hour of day in `0..24`.
pub fn hour_of_day(ts: i64) -> usize {
    (ts.rem_euclid(86_400) / 3_600) as usize
}

/// Travel-time model between consecutively visited POIs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TravelTime {
    /// Constant speed along the great circle.
    Walking { speed_kmh: f64 },
    /// Log-normally distributed speed; the expected travel time is used.
    LogNormal { mu: f64, sigma: f64 },
}

impl Default for TravelTime {
    fn default() -> Self {
        TravelTime::Walking { speed_kmh: 5.0 }
    }
}

impl TravelTime {
    pub fn seconds_for_km(&self, km: f64) -> f64 {
        match *self {
            TravelTime::Walking { speed_kmh } => km / speed_kmh * 3600.0,
            // E[d / S] for ln S ~ N(mu, sigma^2) is d * exp(-mu + sigma^2 / 2).
            TravelTime::LogNormal { mu, sigma } => km * (-mu + 0.5 * sigma * sigma).exp() * 3600.0,
        }
    }

    pub fn seconds(&self, a: &PoiInfo, b: &PoiInfo) -> f64 {
        self.seconds_for_km(haversine_km(a.lat, a.lon, b.lat, b.lon))
    }

    /// Fit `ln(speed km/h)` on consecutive check-in pairs `(km, gap seconds)`.
    /// Pairs closer than 50 m or further apart than 8 hours are ignored.
    pub fn fit_lognormal(pairs: &[(f64, i64)]) -> Option<TravelTime> {
        let logs: Vec<f64> = pairs
            .iter()
            .filter(|&&(km, gap)| km > 0.05 && gap > 0 && gap <= 8 * 3600)
            .map(|&(km, gap)| (km / (gap as f64 / 3600.0)).ln())
            .collect();
        if logs.len() < 2 {
            return None;
        }
        let n = logs.len() as f64;
        let mu = logs.iter().sum::<f64>() / n;
        let var = logs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0);
        Some(TravelTime::LogNormal { mu, sigma: var.sqrt() })
    }
}

fn median(mut v: Vec<i64>) -> Option<i64> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2 })
}

/// Turn one user's time-ordered `(poi, timestamp)` check-ins into visits.
///
/// Departure is the next arrival minus the travel time, never before the
/// arrival. The last visit gets the user's median observed stay (30 minutes
/// when nothing is observed). Check-ins sharing a timestamp keep the first.
pub fn derive_visits(checkins: &[(PoiId, i64)], pois: &[PoiInfo], tt: &TravelTime) -> Vec<Visit> {
    let mut arrivals: Vec<(PoiId, i64)> = Vec::with_capacity(checkins.len());
    for &(p, t) in checkins {
        match arrivals.last() {
            Some(&(_, last)) if t <= last => continue,
            _ => arrivals.push((p, t)),
        }
    }
    let mut visits: Vec<Visit> = arrivals
        .windows(2)
        .map(|w| {
            let ((a, ta), (b, tb)) = (w[0], w[1]);
            let travel = tt.seconds(&pois[a.index()], &pois[b.index()]).round() as i64;
            Visit {
                poi: a,
                arrival: ta,
                departure: (tb - travel).max(ta),
            }
        })
        .collect();
    if let Some(&(p, t)) = arrivals.last() {
        let stay = median(visits.iter().map(Visit::stay).collect()).unwrap_or(FALLBACK_STAY_SECS);
        visits.push(Visit {
            poi: p,
            arrival: t,
            departure: t + stay,
        });
    }
    visits
}
