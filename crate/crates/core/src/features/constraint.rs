//! Movement constraints that discount preference scores.

use serde::{Deserialize, Serialize};

use crate::data::{PoiId, PoiInfo, Session, TravelTime};
use crate::geo::haversine_km;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// Distance from the current location.
    Distance,
    /// Estimated travel time from the current location.
    TravelTime,
}

impl std::str::FromStr for Constraint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "distance" => Ok(Constraint::Distance),
            "travel-time" => Ok(Constraint::TravelTime),
            other => Err(format!("unknown constraint {other:?}")),
        }
    }
}

/// Observed distances of transitions into each location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTable {
    pub kinds: Vec<Constraint>,
    /// Shortest and longest observed incoming hop, in km.
    pub incoming_km: Vec<Option<(f64, f64)>>,
    pub global_km: Option<(f64, f64)>,
    travel: TravelTime,
    pois: Vec<PoiInfo>,
}

fn widen(range: &mut Option<(f64, f64)>, d: f64) {
    *range = Some(match *range {
        None => (d, d),
        Some((lo, hi)) => (lo.min(d), hi.max(d)),
    });
}

fn scaled(value: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

impl ConstraintTable {
    pub fn compute(sessions: &[Session], pois: &[PoiInfo], travel: TravelTime, kinds: Vec<Constraint>) -> ConstraintTable {
        let mut incoming_km = vec![None; pois.len()];
        let mut global_km = None;
        for s in sessions {
            for w in s.visits.windows(2) {
                if w[0].poi == w[1].poi {
                    continue;
                }
                let (a, b) = (&pois[w[0].poi.index()], &pois[w[1].poi.index()]);
                let d = haversine_km(a.lat, a.lon, b.lat, b.lon);
                widen(&mut incoming_km[w[1].poi.index()], d);
                widen(&mut global_km, d);
            }
        }
        ConstraintTable { kinds, incoming_km, global_km, travel, pois: pois.to_vec() }
    }

    fn range_km(&self, to: PoiId) -> (f64, f64) {
        self.incoming_km[to.index()].or(self.global_km).unwrap_or((0.0, 0.0))
    }

    /// Normalised value of one constraint for the hop `from -> to`, in [0, 1].
    pub fn value(&self, kind: Constraint, from: PoiId, to: PoiId) -> f64 {
        let (a, b) = (&self.pois[from.index()], &self.pois[to.index()]);
        let d = haversine_km(a.lat, a.lon, b.lat, b.lon);
        let (lo, hi) = self.range_km(to);
        match kind {
            Constraint::Distance => scaled(d, lo, hi),
            Constraint::TravelTime => scaled(
                self.travel.seconds_for_km(d),
                self.travel.seconds_for_km(lo),
                self.travel.seconds_for_km(hi),
            ),
        }
    }

    /// Mean constraint value; zero without a previous location.
    pub fn penalty(&self, from: Option<PoiId>, to: PoiId) -> f64 {
        match from {
            Some(p) if !self.kinds.is_empty() => {
                self.kinds.iter().map(|&k| self.value(k, p, to)).sum::<f64>() / self.kinds.len() as f64
            }
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CategoryId, UserId, Visit};
    use crate::geo::offset_km;

    fn line(n: usize) -> Vec<PoiInfo> {
        (0..n)
            .map(|i| {
                let (lat, lon) = offset_km(40.0, -74.0, 0.0, i as f64);
                PoiInfo { lat, lon, category: CategoryId(0) }
            })
            .collect()
    }

    fn v(poi: u32, t: i64) -> Visit {
        Visit { poi: PoiId(poi), arrival: t, departure: t + 60 }
    }

    #[test]
    fn penalty_in_unit_range() {
        let pois = line(4);
        let s = Session::new(UserId(0), vec![v(0, 0), v(1, 1000), v(3, 2000), v(2, 3000)]);
        let t = ConstraintTable::compute(&[s], &pois, TravelTime::default(), vec![Constraint::Distance, Constraint::TravelTime]);
        // only one incoming hop into 1 (1 km): degenerate range
        assert_eq!(t.penalty(Some(PoiId(3)), PoiId(1)), 0.0);
        // 0 is never entered, so the global range 1..2 km applies
        let far = t.penalty(Some(PoiId(3)), PoiId(0));
        assert!((far - 1.0).abs() < 1e-9, "{far}");
        assert_eq!(t.penalty(None, PoiId(0)), 0.0);
        for a in 0..4 {
            for b in 0..4 {
                let p = t.penalty(Some(PoiId(a)), PoiId(b));
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
