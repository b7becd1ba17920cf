//! Time-aware preference scores for (user, location, hour).

use serde::{Deserialize, Serialize};

use super::stay::min_max;
use super::{AstTable, VisitProfile};
use crate::data::{CategoryId, PoiId, UserId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceTable {
    pub profiles: Vec<VisitProfile>,
    /// Category weights per user, `[user][category]`, min-max scaled tf-idf.
    pub beta: Vec<Vec<f64>>,
    /// Smallest and largest location-by-hour count per user.
    pub cell_ranges: Vec<(u32, u32)>,
    /// Every visit of every user.
    pub population: VisitProfile,
    pub population_beta: Vec<f64>,
    pub population_range: (u32, u32),
    category_of: Vec<CategoryId>,
}

/// tf-idf of categories for one profile, min-max scaled across categories.
fn category_weights(profile: &VisitProfile, users_with: &[u32], num_users: usize) -> Vec<f64> {
    let raw: Vec<f64> = users_with
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let tf = profile.category_share(CategoryId::from(c));
            if tf == 0.0 || n == 0 {
                0.0
            } else {
                tf * (num_users as f64 / n as f64).ln()
            }
        })
        .collect();
    min_max(&raw)
}

impl PreferenceTable {
    pub fn compute(profiles: Vec<VisitProfile>, category_of: &[CategoryId], num_categories: usize) -> PreferenceTable {
        let num_pois = category_of.len();
        let mut users_with = vec![0u32; num_categories];
        for p in &profiles {
            for c in p.categories.keys() {
                users_with[c.index()] += 1;
            }
        }
        let beta = profiles.iter().map(|p| category_weights(p, &users_with, profiles.len())).collect();
        let cell_ranges = profiles.iter().map(|p| p.cell_range(num_pois)).collect();
        let population = VisitProfile::from_visits(
            profiles.iter().flat_map(|p| {
                p.hourly.iter().flat_map(|(&poi, counts)| {
                    counts.iter().enumerate().flat_map(move |(h, &n)| std::iter::repeat((poi, h)).take(n as usize))
                })
            }),
            category_of,
        );
        let population_beta = category_weights(&population, &users_with, profiles.len());
        let population_range = population.cell_range(num_pois);
        PreferenceTable {
            profiles,
            beta,
            cell_ranges,
            population,
            population_beta,
            population_range,
            category_of: category_of.to_vec(),
        }
    }

    /// Preference of `user` for `poi` at `hour`.
    pub fn user(&self, ast: &AstTable, user: UserId, poi: PoiId, hour: usize) -> f64 {
        let u = user.index();
        let c = self.category_of[poi.index()];
        self.score(
            &self.profiles[u],
            self.beta[u][c.index()],
            self.cell_ranges[u],
            ast.user_poi(user, poi),
            poi,
            hour,
        )
    }

    /// Preference of the whole population for `poi` at `hour`.
    pub fn population(&self, ast: &AstTable, poi: PoiId, hour: usize) -> f64 {
        let c = self.category_of[poi.index()];
        self.score(
            &self.population,
            self.population_beta[c.index()],
            self.population_range,
            ast.poi_mean[poi.index()],
            poi,
            hour,
        )
    }

    /// `user` when known, otherwise the population score.
    pub fn score_for(&self, ast: &AstTable, user: Option<UserId>, poi: PoiId, hour: usize) -> f64 {
        match user {
            Some(u) if u.index() < self.profiles.len() => self.user(ast, u, poi, hour),
            _ => self.population(ast, poi, hour),
        }
    }

    fn score(&self, p: &VisitProfile, beta: f64, range: (u32, u32), ast: f64, poi: PoiId, hour: usize) -> f64 {
        let c = self.category_of[poi.index()];
        let theta = p.category_share(c);
        let n_l = p.visits_at(poi);
        let p_term = if n_l > 0 {
            let (lo, hi) = range;
            let cell = p.visits_at_hour(poi, hour);
            let norm = if hi > lo { (cell - lo) as f64 / (hi - lo) as f64 } else { 0.0 };
            norm / n_l as f64
        } else {
            0.0
        };
        let locs = p.locations_in(c);
        let q_term = if locs.is_empty() {
            0.0
        } else {
            let s: f64 = locs.iter().map(|&l| p.visits_at_hour(l, hour) as f64 / p.visits_at(l) as f64).sum();
            s / locs.len() as f64
        };
        beta * ((1.0 - theta) * p_term + theta * q_term) + (1.0 - beta) * ast
    }

    pub fn num_users(&self) -> usize {
        self.profiles.len()
    }
}

/// Visit counts per location and hour scaled by the largest count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalPopularity {
    pub values: Vec<[f64; 24]>,
}

impl TemporalPopularity {
    pub fn compute(population: &VisitProfile, num_pois: usize) -> TemporalPopularity {
        let max = population.hourly.values().flat_map(|h| h.iter().copied()).max().unwrap_or(0);
        let mut values = vec![[0.0; 24]; num_pois];
        if max > 0 {
            for (poi, counts) in &population.hourly {
                for (h, &n) in counts.iter().enumerate() {
                    values[poi.index()][h] = n as f64 / max as f64;
                }
            }
        }
        TemporalPopularity { values }
    }

    pub fn get(&self, poi: PoiId) -> &[f64; 24] {
        &self.values[poi.index()]
    }
}
