//! Feature formulas transcribed literally, one visit list scan at a time.

use std::collections::BTreeSet;

use caps::data::{Dataset, PoiId, UserId};
use caps::features::{FeatureConfig, FeatureTables};
use caps::geo::haversine_km;

use super::close;

/// Flat visit list `(user, poi, hour, stay)` and helpers written for clarity.
pub struct Naive<'a> {
    pub data: &'a Dataset,
    pub visits: Vec<(usize, usize, usize, f64)>,
    pub n_users: usize,
    pub n_pois: usize,
    pub n_cats: usize,
}

impl<'a> Naive<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let mut visits = Vec::new();
        for s in &data.sessions {
            for v in &s.visits {
                visits.push((s.user.index(), v.poi.index(), v.hour(), v.stay() as f64));
            }
        }
        Naive { data, visits, n_users: data.num_users(), n_pois: data.num_pois(), n_cats: data.num_categories() }
    }

    pub fn cat(&self, l: usize) -> usize {
        self.data.pois[l].category.index()
    }

    pub fn count(&self, f: impl Fn(&(usize, usize, usize, f64)) -> bool) -> f64 {
        self.visits.iter().filter(|v| f(v)).count() as f64
    }

    pub fn stay(&self) -> Vec<f64> {
        let mut st = vec![f64::NAN; self.n_pois];
        for l in 0..self.n_pois {
            let mut per_user = Vec::new();
            for u in 0..self.n_users {
                let stays: Vec<f64> = self.visits.iter().filter(|v| v.0 == u && v.1 == l).map(|v| v.3).collect();
                if !stays.is_empty() {
                    per_user.push(stays.iter().sum::<f64>() / stays.len() as f64);
                }
            }
            if !per_user.is_empty() {
                st[l] = per_user.iter().sum::<f64>() / per_user.len() as f64;
            }
        }
        let visited: Vec<f64> = st.iter().copied().filter(|x| !x.is_nan()).collect();
        let global = if visited.is_empty() { 0.0 } else { visited.iter().sum::<f64>() / visited.len() as f64 };
        st.iter().map(|&x| if x.is_nan() { global } else { x }).collect()
    }

    pub fn stay_norm(&self) -> Vec<f64> {
        let st = self.stay();
        let lo = st.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = st.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        st.iter().map(|&x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }).collect()
    }

    pub fn total(&self, u: usize) -> f64 {
        self.count(|v| v.0 == u)
    }

    pub fn visit_share(&self, u: usize, l: usize) -> f64 {
        self.count(|v| v.0 == u && v.1 == l) / self.total(u)
    }

    pub fn cat_share(&self, u: usize, c: usize) -> f64 {
        if self.total(u) == 0.0 {
            return 0.0;
        }
        self.count(|v| v.0 == u && self.cat(v.1) == c) / self.total(u)
    }

    pub fn locations(&self, u: usize) -> BTreeSet<usize> {
        self.visits.iter().filter(|v| v.0 == u).map(|v| v.1).collect()
    }

    pub fn locations_in(&self, u: usize, c: usize) -> Vec<usize> {
        self.locations(u).into_iter().filter(|&l| self.cat(l) == c).collect()
    }

    pub fn friends(&self, u: usize) -> Vec<usize> {
        self.data.social.friends(UserId(u as u32)).iter().map(|f| f.index()).collect()
    }

    pub fn ast_cat(&self, u: usize, i: usize) -> f64 {
        let stn = self.stay_norm();
        let c = self.cat(i);
        let alpha = self.cat_share(u, c);
        let own = if self.locations(u).contains(&i) { (1.0 - alpha) * stn[i] / self.visit_share(u, i) } else { 0.0 };
        let locs = self.locations_in(u, c);
        let by_cat = if locs.is_empty() {
            0.0
        } else {
            let g = 1.0 / locs.len() as f64;
            alpha * g * locs.iter().map(|&l| stn[l] / self.visit_share(u, l)).sum::<f64>()
        };
        own + by_cat
    }

    pub fn psi(&self, u: usize) -> f64 {
        let friends = self.friends(u);
        if self.total(u) == 0.0 {
            return if friends.is_empty() { 0.0 } else { 1.0 };
        }
        let shared: BTreeSet<usize> = friends.iter().flat_map(|&f| self.locations(f)).collect();
        self.count(|v| v.0 == u && shared.contains(&v.1)) / self.total(u)
    }

    pub fn ast(&self, u: usize, i: usize) -> f64 {
        let friends = self.friends(u);
        let psi = self.psi(u);
        let j = if friends.is_empty() { 0.0 } else { 1.0 / friends.len() as f64 };
        let social: f64 = friends.iter().map(|&k| self.ast_cat(k, i)).sum();
        (1.0 - psi) * self.ast_cat(u, i) + psi * j * social
    }

    pub fn beta(&self, u: usize, c: usize) -> f64 {
        let raw: Vec<f64> = (0..self.n_cats)
            .map(|k| {
                let tf = self.cat_share(u, k);
                let with = (0..self.n_users).filter(|&w| self.cat_share(w, k) > 0.0).count();
                if tf == 0.0 || with == 0 {
                    0.0
                } else {
                    tf * (self.n_users as f64 / with as f64).ln()
                }
            })
            .collect();
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (raw[c] - lo) / (hi - lo)
        } else {
            0.0
        }
    }

    pub fn cell(&self, u: usize, l: usize, h: usize) -> f64 {
        self.count(|v| v.0 == u && v.1 == l && v.2 == h)
    }

    pub fn ps(&self, u: usize, i: usize, h: usize) -> f64 {
        let c = self.cat(i);
        let beta = self.beta(u, c);
        let theta = self.cat_share(u, c);
        let mut cells = Vec::new();
        for l in 0..self.n_pois {
            for hh in 0..24 {
                cells.push(self.cell(u, l, hh));
            }
        }
        let lo = cells.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n_il = self.count(|v| v.0 == u && v.1 == i);
        let p = if n_il > 0.0 {
            let n = if hi > lo { (self.cell(u, i, h) - lo) / (hi - lo) } else { 0.0 };
            n / n_il
        } else {
            0.0
        };
        let locs = self.locations_in(u, c);
        let q = if locs.is_empty() {
            0.0
        } else {
            locs.iter().map(|&l| self.cell(u, l, h) / self.count(|v| v.0 == u && v.1 == l)).sum::<f64>() / locs.len() as f64
        };
        beta * ((1.0 - theta) * p + theta * q) + (1.0 - beta) * self.ast(u, i)
    }

    pub fn km(&self, a: usize, b: usize) -> f64 {
        let (a, b) = (&self.data.pois[a], &self.data.pois[b]);
        haversine_km(a.lat, a.lon, b.lat, b.lon)
    }

    pub fn consolidated(&self, u: usize, i: usize, h: usize, prev: usize) -> f64 {
        let hops = |to: Option<usize>| -> Vec<f64> {
            let mut out = Vec::new();
            for s in &self.data.sessions {
                for w in s.visits.windows(2) {
                    let (a, b) = (w[0].poi.index(), w[1].poi.index());
                    if a != b && to.map_or(true, |t| t == b) {
                        out.push(self.km(a, b));
                    }
                }
            }
            out
        };
        let mut obs = hops(Some(i));
        if obs.is_empty() {
            obs = hops(None);
        }
        let d = self.km(prev, i);
        let scale = |x: f64, lo: f64, hi: f64| if hi > lo { ((x - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        let (lo, hi) = if obs.is_empty() {
            (0.0, 0.0)
        } else {
            (obs.iter().copied().fold(f64::INFINITY, f64::min), obs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        };
        let secs = |km: f64| km / 5.0 * 3600.0;
        let dist = scale(d, lo, hi);
        let time = scale(secs(d), secs(lo), secs(hi));
        self.ps(u, i, h) * (1.0 - (dist + time) / 2.0)
    }
}

/// Panics on the first table entry that disagrees with the transcription.
pub fn check_against_oracle(data: &Dataset) {
    let tables = FeatureTables::build(data, &FeatureConfig::default());
    let naive = Naive::new(data);
    for (l, (&got, want)) in tables.stay.normalized.iter().zip(naive.stay_norm()).enumerate() {
        assert!(close(got, want, 1e-12), "ST'({l}): {got} vs {want}");
    }
    for u in 0..naive.n_users {
        let uid = UserId(u as u32);
        for i in 0..naive.n_pois {
            let poi = PoiId(i as u32);
            let got = tables.ast.user_poi(uid, poi);
            let want = naive.ast(u, i);
            assert!(close(got, want, 1e-12), "AST({u},{i}): {got} vs {want}");
            for h in [0, 7, 13, 22] {
                let got = tables.preference(Some(uid), poi, h);
                let want = naive.ps(u, i, h);
                assert!(close(got, want, 1e-12), "PS({u},{i},{h}): {got} vs {want}");
                for prev in 0..naive.n_pois {
                    let got = tables.consolidated(Some(uid), poi, h, Some(PoiId(prev as u32)));
                    let want = naive.consolidated(u, i, h, prev);
                    assert!(close(got, want, 1e-12), "P({u},{i},{h}|{prev}): {got} vs {want}");
                }
            }
        }
    }
    for i in 0..naive.n_pois {
        let want = (0..naive.n_users).map(|u| naive.ast(u, i)).sum::<f64>() / naive.n_users as f64;
        assert!(close(tables.ast.poi_mean[i], want, 1e-12), "mean AST({i})");
    }
}
