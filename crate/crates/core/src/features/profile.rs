//! Per-user visit counts keyed by location, hour and category.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{CategoryId, PoiId, Session};

/// Visits of one user (or of everyone, for the population profile).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisitProfile {
    pub total: u32,
    /// Visit counts per location and arrival hour.
    pub hourly: BTreeMap<PoiId, [u32; 24]>,
    pub categories: BTreeMap<CategoryId, CategoryUsage>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryUsage {
    pub visits: u32,
    /// Distinct locations of this category, ascending.
    pub locations: Vec<PoiId>,
}

impl VisitProfile {
    /// Build from `(location, arrival hour)` pairs.
    pub fn from_visits<I>(visits: I, category_of: &[CategoryId]) -> VisitProfile
    where
        I: IntoIterator<Item = (PoiId, usize)>,
    {
        let mut p = VisitProfile::default();
        for (poi, hour) in visits {
            p.total += 1;
            p.hourly.entry(poi).or_insert([0; 24])[hour % 24] += 1;
            let usage = p.categories.entry(category_of[poi.index()]).or_default();
            usage.visits += 1;
            if let Err(at) = usage.locations.binary_search(&poi) {
                usage.locations.insert(at, poi);
            }
        }
        p
    }

    pub fn from_sessions<'a, I>(sessions: I, category_of: &[CategoryId]) -> VisitProfile
    where
        I: IntoIterator<Item = &'a Session>,
    {
        Self::from_visits(
            sessions.into_iter().flat_map(|s| s.visits.iter().map(|v| (v.poi, v.hour()))),
            category_of,
        )
    }

    /// Only the visits that arrived during `hour`.
    pub fn restrict_to_hour(&self, hour: usize, category_of: &[CategoryId]) -> VisitProfile {
        let visits = self.hourly.iter().flat_map(|(&poi, counts)| {
            std::iter::repeat((poi, hour)).take(counts[hour] as usize)
        });
        Self::from_visits(visits, category_of)
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// |V_{u,l}|.
    pub fn visits_at(&self, poi: PoiId) -> u32 {
        self.hourly.get(&poi).map_or(0, |h| h.iter().sum())
    }

    /// |V_{u,l,t}|.
    pub fn visits_at_hour(&self, poi: PoiId, hour: usize) -> u32 {
        self.hourly.get(&poi).map_or(0, |h| h[hour % 24])
    }

    /// Share of the user's visits made at `poi`.
    pub fn visit_share(&self, poi: PoiId) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.visits_at(poi) as f64 / self.total as f64
        }
    }

    /// Share of the user's visits made in category `c`.
    pub fn category_share(&self, c: CategoryId) -> f64 {
        match self.categories.get(&c) {
            Some(u) if self.total > 0 => u.visits as f64 / self.total as f64,
            _ => 0.0,
        }
    }

    pub fn locations_in(&self, c: CategoryId) -> &[PoiId] {
        self.categories.get(&c).map_or(&[], |u| &u.locations)
    }

    pub fn locations(&self) -> impl Iterator<Item = PoiId> + '_ {
        self.hourly.keys().copied()
    }

    /// Smallest and largest count over the full location-by-hour grid.
    pub fn cell_range(&self, num_pois: usize) -> (u32, u32) {
        let max = self.hourly.values().flat_map(|h| h.iter().copied()).max().unwrap_or(0);
        let full = self.hourly.len() == num_pois;
        let min = if full {
            self.hourly.values().flat_map(|h| h.iter().copied()).min().unwrap_or(0)
        } else {
            0
        };
        (min, max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_shares() {
        let cats = [CategoryId(0), CategoryId(1), CategoryId(0)];
        let p = VisitProfile::from_visits(
            [(PoiId(0), 9), (PoiId(0), 9), (PoiId(2), 10), (PoiId(1), 23)],
            &cats,
        );
        assert_eq!(p.total, 4);
        assert_eq!(p.visits_at(PoiId(0)), 2);
        assert_eq!(p.visits_at_hour(PoiId(0), 9), 2);
        assert_eq!(p.visits_at_hour(PoiId(0), 10), 0);
        assert_eq!(p.category_share(CategoryId(0)), 0.75);
        assert_eq!(p.locations_in(CategoryId(0)), &[PoiId(0), PoiId(2)]);
        assert_eq!(p.cell_range(3), (0, 2));
        let at9 = p.restrict_to_hour(9, &cats);
        assert_eq!(at9.total, 2);
        assert_eq!(at9.locations_in(CategoryId(0)), &[PoiId(0)]);
    }
}
