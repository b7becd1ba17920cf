//! Average stay-time preference of users for locations and categories.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::VisitProfile;
use crate::data::{CategoryId, PoiId, SocialGraph, UserId};

/// Category-aware stay preference of one user, stored sparsely:
/// `AST_cat(u, i) = own[i] + by_category[cat(i)]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UserAst {
    /// `(1 - alpha) * ST'(i) / V'(i)` for visited locations.
    pub own: BTreeMap<PoiId, f64>,
    /// `alpha * G * sum over the category's locations of ST'(l) / V'(l)`.
    pub by_category: BTreeMap<CategoryId, f64>,
}

impl UserAst {
    pub fn compute(profile: &VisitProfile, stay_norm: &[f64], category_of: &[CategoryId]) -> UserAst {
        let mut by_category = BTreeMap::new();
        for (&c, usage) in &profile.categories {
            let alpha = profile.category_share(c);
            let g = 1.0 / usage.locations.len() as f64;
            let s: f64 = usage.locations.iter().map(|&l| stay_norm[l.index()] / profile.visit_share(l)).sum();
            by_category.insert(c, alpha * g * s);
        }
        let own = profile
            .locations()
            .map(|i| {
                let alpha = profile.category_share(category_of[i.index()]);
                let f = stay_norm[i.index()] / profile.visit_share(i);
                (i, (1.0 - alpha) * f)
            })
            .collect();
        UserAst { own, by_category }
    }

    pub fn value(&self, poi: PoiId, category: CategoryId) -> f64 {
        self.own.get(&poi).copied().unwrap_or(0.0) + self.by_category.get(&category).copied().unwrap_or(0.0)
    }

    /// Sum of `AST_cat(u, i)` over the user's distinct locations in `c`.
    fn category_sum(&self, profile: &VisitProfile, c: CategoryId) -> f64 {
        profile.locations_in(c).iter().map(|&i| self.value(i, c)).sum()
    }
}

/// Share of each user's visits that were at a location some friend visited,
/// split by category. Returns `(overall, per category)`.
fn friend_overlap(
    profiles: &[VisitProfile],
    social: &SocialGraph,
    category_of: &[CategoryId],
) -> (Vec<f64>, Vec<BTreeMap<CategoryId, f64>>) {
    let mut overall = Vec::with_capacity(profiles.len());
    let mut by_cat = Vec::with_capacity(profiles.len());
    for (u, p) in profiles.iter().enumerate() {
        let friends = social.friends(UserId::from(u));
        let shared: BTreeSet<PoiId> = friends.iter().flat_map(|f| profiles[f.index()].locations()).collect();
        if p.is_empty() {
            // a user without history borrows everything from friends
            overall.push(if friends.is_empty() { 0.0 } else { 1.0 });
            by_cat.push(BTreeMap::new());
            continue;
        }
        let mut common = 0u32;
        let mut cats: BTreeMap<CategoryId, f64> = BTreeMap::new();
        for l in p.locations().filter(|l| shared.contains(l)) {
            let n = p.visits_at(l);
            common += n;
            *cats.entry(category_of[l.index()]).or_default() += n as f64;
        }
        for v in cats.values_mut() {
            *v /= p.total as f64;
        }
        overall.push(common as f64 / p.total as f64);
        by_cat.push(cats);
    }
    (overall, by_cat)
}

/// Per-user, per-category stay preference blending own and friends' history.
fn user_category_ast(
    profiles: &[VisitProfile],
    users: &[UserAst],
    gamma: &[BTreeMap<CategoryId, f64>],
    social: &SocialGraph,
    num_categories: usize,
) -> Vec<Vec<f64>> {
    let own: Vec<Vec<f64>> = profiles
        .iter()
        .zip(users)
        .map(|(p, a)| (0..num_categories).map(|c| a.category_sum(p, CategoryId::from(c))).collect())
        .collect();
    (0..profiles.len())
        .map(|u| {
            let friends = social.friends(UserId::from(u));
            (0..num_categories)
                .map(|c| {
                    let g = gamma[u].get(&CategoryId::from(c)).copied().unwrap_or(0.0);
                    let from_friends: f64 = friends.iter().map(|f| own[f.index()][c]).sum();
                    (1.0 - g) * own[u][c] + g * from_friends
                })
                .collect()
        })
        .collect()
}

/// Category totals over all users for one set of profiles.
pub(crate) fn category_totals(
    profiles: &[VisitProfile],
    social: &SocialGraph,
    stay_norm: &[f64],
    category_of: &[CategoryId],
    num_categories: usize,
) -> Vec<f64> {
    let users: Vec<UserAst> = profiles.iter().map(|p| UserAst::compute(p, stay_norm, category_of)).collect();
    let (_, gamma) = friend_overlap(profiles, social, category_of);
    let per_user = user_category_ast(profiles, &users, &gamma, social, num_categories);
    (0..num_categories).map(|c| per_user.iter().map(|row| row[c]).sum()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AstTable {
    pub users: Vec<UserAst>,
    /// Friend-overlap weight per user.
    pub psi: Vec<f64>,
    /// Friend-overlap weight per user and category.
    pub gamma: Vec<BTreeMap<CategoryId, f64>>,
    /// Per-user category preference, `[user][category]`.
    pub user_category: Vec<Vec<f64>>,
    /// Category preference summed over users.
    pub category: Vec<f64>,
    /// Category preference from visits arriving in each hour, `[category][hour]`.
    pub category_hourly: Vec<Vec<f64>>,
    /// Location preference averaged over users.
    pub poi_mean: Vec<f64>,
    social: SocialGraph,
    category_of: Vec<CategoryId>,
}

impl AstTable {
    pub fn compute(
        profiles: &[VisitProfile],
        social: &SocialGraph,
        stay_norm: &[f64],
        category_of: &[CategoryId],
        num_categories: usize,
    ) -> AstTable {
        let users: Vec<UserAst> = profiles.iter().map(|p| UserAst::compute(p, stay_norm, category_of)).collect();
        let (psi, gamma) = friend_overlap(profiles, social, category_of);
        let user_category = user_category_ast(profiles, &users, &gamma, social, num_categories);
        let category = (0..num_categories).map(|c| user_category.iter().map(|row| row[c]).sum()).collect();
        let mut category_hourly = vec![vec![0.0; 24]; num_categories];
        for hour in 0..24 {
            let restricted: Vec<VisitProfile> = profiles.iter().map(|p| p.restrict_to_hour(hour, category_of)).collect();
            let totals = category_totals(&restricted, social, stay_norm, category_of, num_categories);
            for (c, v) in totals.into_iter().enumerate() {
                category_hourly[c][hour] = v;
            }
        }
        let mut table = AstTable {
            users,
            psi,
            gamma,
            user_category,
            category,
            category_hourly,
            poi_mean: Vec::new(),
            social: social.clone(),
            category_of: category_of.to_vec(),
        };
        let n_users = profiles.len().max(1) as f64;
        table.poi_mean = (0..category_of.len())
            .map(|l| (0..profiles.len()).map(|u| table.user_poi(UserId::from(u), PoiId::from(l))).sum::<f64>() / n_users)
            .collect();
        table
    }

    /// Own-history preference of `user` for `poi`.
    pub fn user_poi_own(&self, user: UserId, poi: PoiId) -> f64 {
        self.users[user.index()].value(poi, self.category_of[poi.index()])
    }

    /// Preference of `user` for `poi` blended with friends' preferences.
    pub fn user_poi(&self, user: UserId, poi: PoiId) -> f64 {
        let psi = self.psi[user.index()];
        let own = self.user_poi_own(user, poi);
        let friends = self.social.friends(user);
        let j = if friends.is_empty() { 0.0 } else { 1.0 / friends.len() as f64 };
        let from_friends: f64 = friends.iter().map(|&k| self.user_poi_own(k, poi)).sum();
        (1.0 - psi) * own + psi * j * from_friends
    }

    pub fn category_at_hour(&self, c: CategoryId, hour: usize) -> f64 {
        self.category_hourly[c.index()][hour % 24]
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cats() -> Vec<CategoryId> {
        vec![CategoryId(0), CategoryId(0), CategoryId(1)]
    }

    #[test]
    fn single_user_closed_form() {
        // u visits l0 twice and l2 once; ST' = [1.0, 0.5, 0.25]
        let p = VisitProfile::from_visits([(PoiId(0), 9), (PoiId(0), 10), (PoiId(2), 11)], &cats());
        let st = [1.0, 0.5, 0.25];
        let a = UserAst::compute(&p, &st, &cats());
        // category 0: alpha 2/3, G 1, S = 1.0 / (2/3)
        let alpha = 2.0 / 3.0;
        let f0 = 1.0 / (2.0 / 3.0);
        let expect0 = (1.0 - alpha) * f0 + alpha * f0;
        assert!((a.value(PoiId(0), CategoryId(0)) - expect0).abs() < 1e-12);
        // unvisited l1 shares only the category term
        assert!((a.value(PoiId(1), CategoryId(0)) - alpha * f0).abs() < 1e-12);
    }

    #[test]
    fn no_friends_collapses_to_own() {
        let p = VisitProfile::from_visits([(PoiId(0), 9), (PoiId(2), 11)], &cats());
        let t = AstTable::compute(&[p], &SocialGraph::empty(1), &[0.3, 0.6, 0.9], &cats(), 2);
        for l in 0..3 {
            assert_eq!(t.user_poi(UserId(0), PoiId(l)), t.user_poi_own(UserId(0), PoiId(l)));
        }
    }

    #[test]
    fn cold_start_user_borrows_from_friend() {
        let p0 = VisitProfile::from_visits([(PoiId(0), 9), (PoiId(2), 11)], &cats());
        let p1 = VisitProfile::default();
        let social = SocialGraph::from_edges(2, [(UserId(0), UserId(1))]);
        let t = AstTable::compute(&[p0, p1], &social, &[0.3, 0.6, 0.9], &cats(), 2);
        assert_eq!(t.psi[1], 1.0);
        assert!(t.user_poi(UserId(1), PoiId(0)) > 0.0);
        assert_eq!(t.user_poi(UserId(1), PoiId(0)), t.user_poi_own(UserId(0), PoiId(0)));
    }
}
