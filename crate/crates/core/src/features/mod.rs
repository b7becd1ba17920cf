//! Personalised preference statistics and model input vectors.

mod ast;
mod constraint;
mod preference;
mod profile;
mod stay;
mod vectors;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use ast::{AstTable, UserAst};
pub use constraint::{Constraint, ConstraintTable};
pub use preference::{PreferenceTable, TemporalPopularity};
pub use profile::{CategoryUsage, VisitProfile};
pub use stay::{min_max, StayStats};
pub use vectors::{AttributeVector, FeatureVector};

use crate::data::{hour_of_day, CategoryId, Dataset, PoiId, PoiInfo, Session, TravelTime, UserId, Visit};
use crate::error::{Error, Result};
use crate::geo::haversine_km;
use vectors::{code_unit, ratio};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub constraints: Vec<Constraint>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { constraints: vec![Constraint::Distance, Constraint::TravelTime] }
    }
}

/// Start and end of one observed multi-visit session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub user: UserId,
    pub start: PoiId,
    pub start_hour: usize,
    pub end: PoiId,
    pub end_hour: usize,
    pub mean_distance_km: f64,
}

/// Largest values used to scale network inputs into roughly [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct InputScale {
    ast: f64,
    ast_category_hour: f64,
    preference: f64,
}

/// Every statistic derived from a training set of sessions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureTables {
    pub num_users: usize,
    pub num_categories: usize,
    pub pois: Vec<PoiInfo>,
    pub travel: TravelTime,
    pub stay: StayStats,
    pub ast: AstTable,
    pub preference: PreferenceTable,
    pub popularity: TemporalPopularity,
    pub constraints: ConstraintTable,
    pub summaries: Vec<SessionSummary>,
    scale: InputScale,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    version: u32,
    seed: Option<u64>,
    tables: FeatureTables,
}

const SNAPSHOT_FORMAT: &str = "caps-features";

fn mean_hop_km(pois: &[PoiInfo], visits: &[Visit]) -> f64 {
    if visits.len() < 2 {
        return 0.0;
    }
    let total: f64 = visits
        .windows(2)
        .map(|w| {
            let (a, b) = (&pois[w[0].poi.index()], &pois[w[1].poi.index()]);
            haversine_km(a.lat, a.lon, b.lat, b.lon)
        })
        .sum();
    total / (visits.len() - 1) as f64
}

fn circular_hours(a: usize, b: usize) -> usize {
    let d = a.abs_diff(b) % 24;
    d.min(24 - d)
}

fn mode<T: Ord + Copy>(values: impl Iterator<Item = T>) -> Option<T> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    // ties go to the smallest value
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, n)| n == best).map(|(v, _)| v)
}

impl FeatureTables {
    pub fn build(data: &Dataset, cfg: &FeatureConfig) -> FeatureTables {
        let num_pois = data.num_pois();
        let num_users = data.num_users();
        let num_categories = data.num_categories();
        let category_of: Vec<CategoryId> = data.pois.iter().map(|p| p.category).collect();
        let stay = StayStats::compute(&data.sessions, num_pois);

        let mut by_user: Vec<Vec<&Session>> = vec![Vec::new(); num_users];
        for s in &data.sessions {
            by_user[s.user.index()].push(s);
        }
        let profiles: Vec<VisitProfile> = by_user
            .iter()
            .map(|list| VisitProfile::from_sessions(list.iter().copied(), &category_of))
            .collect();
        let ast = AstTable::compute(&profiles, &data.social, &stay.normalized, &category_of, num_categories);
        let preference = PreferenceTable::compute(profiles, &category_of, num_categories);
        let popularity = TemporalPopularity::compute(&preference.population, num_pois);
        let constraints = ConstraintTable::compute(&data.sessions, &data.pois, data.travel, cfg.constraints.clone());
        let summaries = data
            .sessions
            .iter()
            .filter(|s| s.is_trainable())
            .map(|s| {
                let (first, last) = (&s.visits[0], &s.visits[s.len() - 1]);
                SessionSummary {
                    user: s.user,
                    start: first.poi,
                    start_hour: first.hour(),
                    end: last.poi,
                    end_hour: last.hour(),
                    mean_distance_km: mean_hop_km(&data.pois, &s.visits),
                }
            })
            .collect();

        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
        let preference_max = max(&mut (0..num_pois)
            .flat_map(|l| (0..24).map(move |h| (l, h)))
            .map(|(l, h)| preference.population(&ast, PoiId::from(l), h)));
        let scale = InputScale {
            ast: max(&mut ast.poi_mean.iter().copied()),
            ast_category_hour: max(&mut ast.category_hourly.iter().flatten().copied()),
            preference: preference_max,
        };
        FeatureTables {
            num_users,
            num_categories,
            pois: data.pois.clone(),
            travel: data.travel,
            stay,
            ast,
            preference,
            popularity,
            constraints,
            summaries,
            scale,
        }
    }

    pub fn num_pois(&self) -> usize {
        self.pois.len()
    }

    fn check_poi(&self, poi: PoiId) -> Result<()> {
        if poi.index() < self.pois.len() {
            Ok(())
        } else {
            Err(Error::PoiOutOfRange { index: poi.index(), size: self.pois.len() })
        }
    }

    pub fn category(&self, poi: PoiId) -> CategoryId {
        self.pois[poi.index()].category
    }

    pub fn distance_km(&self, a: PoiId, b: PoiId) -> f64 {
        let (a, b) = (&self.pois[a.index()], &self.pois[b.index()]);
        haversine_km(a.lat, a.lon, b.lat, b.lon)
    }

    pub fn travel_secs(&self, a: PoiId, b: PoiId) -> f64 {
        self.travel.seconds(&self.pois[a.index()], &self.pois[b.index()])
    }

    /// Preference score; unknown users get the population score.
    pub fn preference(&self, user: Option<UserId>, poi: PoiId, hour: usize) -> f64 {
        self.preference.score_for(&self.ast, user, poi, hour)
    }

    /// Preference score discounted by the movement constraints from `prev`.
    pub fn consolidated(&self, user: Option<UserId>, poi: PoiId, hour: usize, prev: Option<PoiId>) -> f64 {
        self.preference(user, poi, hour) * (1.0 - self.constraints.penalty(prev, poi))
    }

    pub fn attribute_vector(&self, poi: PoiId, hour: usize, prev: Option<PoiId>) -> Result<AttributeVector> {
        self.check_poi(poi)?;
        if let Some(p) = prev {
            self.check_poi(p)?;
        }
        let category = self.category(poi);
        Ok(AttributeVector {
            stay: self.stay.norm(poi),
            ast: self.ast.poi_mean[poi.index()],
            ast_category_hour: self.ast.category_at_hour(category, hour),
            preference: self.preference.population(&self.ast, poi, hour),
            category,
            hourly_popularity: *self.popularity.get(poi),
            distance_km: prev.map_or(0.0, |p| self.distance_km(p, poi)),
        })
    }

    /// Network encoding of an attribute vector: codes and magnitudes scaled to [0, 1].
    pub fn attribute_input(&self, a: &AttributeVector) -> Vec<f64> {
        let mut v = Vec::with_capacity(AttributeVector::LEN);
        v.extend([
            a.stay,
            ratio(a.ast, self.scale.ast),
            ratio(a.ast_category_hour, self.scale.ast_category_hour),
            ratio(a.preference, self.scale.preference),
            code_unit(a.category.0, self.num_categories),
        ]);
        v.extend(a.hourly_popularity);
        v.push(a.distance_km.ln_1p());
        v
    }

    /// Encoded attribute inputs for each visit of a sequence.
    pub fn attribute_inputs(&self, visits: &[Visit]) -> Result<Vec<Vec<f64>>> {
        visits
            .iter()
            .enumerate()
            .map(|(t, v)| {
                let prev = t.checked_sub(1).map(|p| visits[p].poi);
                Ok(self.attribute_input(&self.attribute_vector(v.poi, v.hour(), prev)?))
            })
            .collect()
    }

    pub fn feature_vector(&self, visits: &[Visit]) -> Result<FeatureVector> {
        let (first, last) = match (visits.first(), visits.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::Invalid("feature vector of an empty sequence".into())),
        };
        for v in visits {
            self.check_poi(v.poi)?;
        }
        Ok(FeatureVector {
            start_category: self.category(first.poi),
            end_category: self.category(last.poi),
            start: first.poi,
            end: last.poi,
            mean_distance_km: mean_hop_km(&self.pois, visits),
            start_hour: hour_of_day(first.arrival),
            end_hour: hour_of_day(last.arrival),
        })
    }

    /// Network encoding of a feature vector.
    pub fn feature_input(&self, f: &FeatureVector) -> Vec<f64> {
        vec![
            code_unit(f.start_category.0, self.num_categories),
            code_unit(f.end_category.0, self.num_categories),
            code_unit(f.start.0, self.pois.len()),
            code_unit(f.end.0, self.pois.len()),
            f.mean_distance_km.ln_1p(),
            f.start_hour as f64 / 24.0,
            f.end_hour as f64 / 24.0,
        ]
    }

    /// Guess the sequence features of a trip that has not happened yet from
    /// the user's past sessions (or everyone's, for unknown users) that
    /// started at the same place closest in time of day.
    pub fn estimate_features(&self, user: Option<UserId>, start: PoiId, start_hour: usize) -> Result<FeatureVector> {
        self.check_poi(start)?;
        let own: Vec<&SessionSummary> = match user {
            Some(u) => self.summaries.iter().filter(|s| s.user == u).collect(),
            None => Vec::new(),
        };
        let all: Vec<&SessionSummary> = self.summaries.iter().collect();
        fn same_start<'a>(list: &[&'a SessionSummary], start: PoiId) -> Vec<&'a SessionSummary> {
            list.iter().copied().filter(|s| s.start == start).collect()
        }
        let pools = [same_start(&own, start), same_start(&all, start), own.clone()];
        let pool = pools.iter().find(|p| !p.is_empty());
        let Some(pool) = pool else {
            let mean = if all.is_empty() { 0.0 } else { all.iter().map(|s| s.mean_distance_km).sum::<f64>() / all.len() as f64 };
            let category = self.category(start);
            return Ok(FeatureVector {
                start_category: category,
                end_category: category,
                start,
                end: start,
                mean_distance_km: mean,
                start_hour,
                end_hour: start_hour,
            });
        };
        let nearest = pool.iter().map(|s| circular_hours(s.start_hour, start_hour)).min().unwrap_or(0);
        let matches: Vec<&SessionSummary> =
            pool.iter().copied().filter(|s| circular_hours(s.start_hour, start_hour) == nearest).collect();
        let end = mode(matches.iter().map(|s| s.end)).unwrap_or(start);
        let span = mode(matches.iter().map(|s| (s.end_hour + 24 - s.start_hour) % 24)).unwrap_or(0);
        let mean = matches.iter().map(|s| s.mean_distance_km).sum::<f64>() / matches.len() as f64;
        Ok(FeatureVector {
            start_category: self.category(start),
            end_category: self.category(end),
            start,
            end,
            mean_distance_km: mean,
            start_hour,
            end_hour: (start_hour + span) % 24,
        })
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<()> {
        let snap = Snapshot { format: SNAPSHOT_FORMAT.into(), version: 1, seed, tables: self.clone() };
        let text = serde_json::to_string(&snap)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<FeatureTables> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let snap: Snapshot = serde_json::from_str(&text)?;
        if snap.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!("{} is not a feature snapshot", path.display())));
        }
        Ok(snap.tables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Encodings, SocialGraph};
    use crate::geo::offset_km;

    fn toy() -> Dataset {
        let pois: Vec<PoiInfo> = (0..3)
            .map(|i| {
                let (lat, lon) = offset_km(40.0, -74.0, 0.0, i as f64);
                PoiInfo { lat, lon, category: CategoryId(i as u32 % 2) }
            })
            .collect();
        let v = |poi: u32, h: i64| Visit { poi: PoiId(poi), arrival: h * 3600, departure: h * 3600 + 1200 };
        let sessions = vec![
            Session::new(UserId(0), vec![v(0, 9), v(1, 10)]),
            Session::new(UserId(0), vec![v(0, 33), v(1, 34), v(2, 35)]),
            Session::new(UserId(1), vec![v(2, 13)]),
        ];
        Dataset {
            encodings: Encodings::from_lists(
                vec!["a".into(), "b".into()],
                vec!["p0".into(), "p1".into(), "p2".into()],
                vec!["c0".into(), "c1".into()],
            ),
            pois,
            sessions,
            social: SocialGraph::empty(2),
            travel: TravelTime::default(),
        }
    }

    #[test]
    fn two_visit_feature_vector() {
        let d = toy();
        let t = FeatureTables::build(&d, &FeatureConfig::default());
        let f = t.feature_vector(&d.sessions[0].visits).unwrap();
        assert!((f.mean_distance_km - 1.0).abs() < 1e-9);
        assert_eq!((f.start_hour, f.end_hour), (9, 10));
        let one = t.feature_vector(&d.sessions[2].visits).unwrap();
        assert_eq!(one.start, one.end);
        assert_eq!(one.mean_distance_km, 0.0);
    }

    #[test]
    fn attribute_vector_shape() {
        let t = FeatureTables::build(&toy(), &FeatureConfig::default());
        let a = t.attribute_vector(PoiId(1), 10, None).unwrap();
        assert_eq!(a.distance_km, 0.0);
        let input = t.attribute_input(&a);
        assert_eq!(input.len(), AttributeVector::LEN);
        assert!(input.iter().all(|x| x.is_finite()));
        assert!(a.hourly_popularity.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(matches!(t.attribute_vector(PoiId(9), 0, None), Err(Error::PoiOutOfRange { .. })));
    }

    #[test]
    fn estimated_features_follow_history() {
        let t = FeatureTables::build(&toy(), &FeatureConfig::default());
        let f = t.estimate_features(Some(UserId(0)), PoiId(0), 9).unwrap();
        assert_eq!(f.end, PoiId(1));
        assert_eq!(f.end_hour, 10);
        let cold = t.estimate_features(Some(UserId(1)), PoiId(1), 8).unwrap();
        assert_eq!(cold.end, PoiId(1));
    }

    #[test]
    fn snapshot_roundtrip() {
        let t = FeatureTables::build(&toy(), &FeatureConfig::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.json");
        t.save(&path, Some(7)).unwrap();
        assert_eq!(FeatureTables::load(&path).unwrap(), t);
    }
}
