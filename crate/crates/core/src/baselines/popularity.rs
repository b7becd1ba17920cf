//! Most-visited nearby POI, searching a growing radius.

use std::collections::BTreeSet;

use crate::data::{PoiId, PoiInfo, Session};
use crate::error::{Error, Result};
use crate::geo::haversine_km;

#[derive(Clone, Debug, PartialEq)]
pub struct Popularity {
    pub counts: Vec<u32>,
    pois: Vec<PoiInfo>,
    pub radius_km: f64,
    pub growth: f64,
}

/// Result of one nearest-popular lookup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pick {
    pub poi: PoiId,
    pub radius_km: f64,
    pub expansions: usize,
}

impl Popularity {
    pub fn fit(sessions: &[Session], pois: &[PoiInfo], radius_km: f64, growth: f64) -> Popularity {
        let mut counts = vec![0u32; pois.len()];
        for s in sessions {
            for v in &s.visits {
                counts[v.poi.index()] += 1;
            }
        }
        Popularity { counts, pois: pois.to_vec(), radius_km, growth: growth.max(1.0 + 1e-9) }
    }

    fn distance(&self, a: PoiId, b: PoiId) -> f64 {
        let (a, b) = (&self.pois[a.index()], &self.pois[b.index()]);
        haversine_km(a.lat, a.lon, b.lat, b.lon)
    }

    /// Most-visited POI within the radius of `cur` that is not excluded; the
    /// radius grows by `growth` until something qualifies.
    pub fn next(&self, cur: PoiId, exclude: &BTreeSet<PoiId>) -> Result<Pick> {
        let eligible: Vec<(PoiId, f64)> = (0..self.pois.len())
            .map(PoiId::from)
            .filter(|p| *p != cur && !exclude.contains(p))
            .map(|p| (p, self.distance(cur, p)))
            .collect();
        let Some(farthest) = eligible.iter().map(|e| e.1).reduce(f64::max) else {
            return Err(Error::Exhausted);
        };
        let mut radius = self.radius_km;
        let mut expansions = 0;
        loop {
            let best = eligible
                .iter()
                .filter(|(_, d)| *d <= radius)
                .max_by(|a, b| self.counts[a.0.index()].cmp(&self.counts[b.0.index()]).then(b.0.cmp(&a.0)));
            if let Some(&(poi, _)) = best {
                return Ok(Pick { poi, radius_km: radius, expansions });
            }
            if radius >= farthest {
                return Err(Error::Exhausted);
            }
            radius *= self.growth;
            expansions += 1;
        }
    }

    /// `length` POIs from `start`, avoiding repeats while possible.
    pub fn sequence(&self, start: PoiId, length: usize) -> Vec<PoiId> {
        let mut out = vec![start];
        let mut seen: BTreeSet<PoiId> = out.iter().copied().collect();
        while out.len() < length {
            let cur = *out.last().expect("non-empty");
            let next = match self.next(cur, &seen) {
                Ok(p) => p.poi,
                Err(_) => {
                    seen = BTreeSet::from([cur]);
                    self.next(cur, &seen).map(|p| p.poi).unwrap_or(cur)
                }
            };
            seen.insert(next);
            out.push(next);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CategoryId, UserId, Visit};
    use crate::geo::offset_km;

    fn line(km: &[f64]) -> Vec<PoiInfo> {
        km.iter()
            .map(|&x| {
                let (lat, lon) = offset_km(10.0, 20.0, 0.0, x);
                PoiInfo { lat, lon, category: CategoryId(0) }
            })
            .collect()
    }

    fn with_counts(pois: &[PoiInfo], counts: &[u32]) -> Popularity {
        let mut p = Popularity::fit(&[], pois, 2.0, 1.5);
        p.counts = counts.to_vec();
        p
    }

    #[test]
    fn picks_most_visited_in_radius() {
        let p = with_counts(&line(&[0.0, 1.0, 1.5, 30.0]), &[0, 5, 9, 100]);
        assert_eq!(p.next(PoiId(0), &BTreeSet::new()).unwrap().poi, PoiId(2));
        let ex = BTreeSet::from([PoiId(2)]);
        assert_eq!(p.next(PoiId(0), &ex).unwrap().poi, PoiId(1));
    }

    #[test]
    fn radius_grows_geometrically() {
        let p = with_counts(&line(&[0.0, 5.0]), &[0, 1]);
        let pick = p.next(PoiId(0), &BTreeSet::new()).unwrap();
        assert_eq!(pick.poi, PoiId(1));
        assert_eq!(pick.expansions, 3);
        assert!((pick.radius_km - 6.75).abs() < 1e-12);
    }

    #[test]
    fn nothing_left_is_an_error() {
        let p = with_counts(&line(&[0.0]), &[3]);
        assert!(matches!(p.next(PoiId(0), &BTreeSet::new()), Err(Error::Exhausted)));
        assert_eq!(p.sequence(PoiId(0), 3), vec![PoiId(0); 3]);
    }

    #[test]
    fn counts_come_from_sessions() {
        let pois = line(&[0.0, 1.0]);
        let v = |p: u32| Visit { poi: PoiId(p), arrival: 0, departure: 0 };
        let s = Session::new(UserId(0), vec![v(1), v(1), v(0)]);
        let p = Popularity::fit(&[s], &pois, 2.0, 1.5);
        assert_eq!(p.counts, vec![1, 2]);
        assert_eq!(p.sequence(PoiId(0), 3), vec![PoiId(0), PoiId(1), PoiId(0)]);
    }
}
