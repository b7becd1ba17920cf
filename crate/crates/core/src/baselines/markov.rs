//! First-order Markov chains with additive smoothing, per user.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::data::{PoiId, Session, UserId};
use crate::generate::sample_next;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarkovChain {
    /// POIs the chain knows, ascending.
    pub alphabet: Vec<PoiId>,
    pub transitions: BTreeMap<PoiId, BTreeMap<PoiId, u32>>,
    pub initial: BTreeMap<PoiId, u32>,
    pub smoothing: f64,
}

impl MarkovChain {
    pub fn fit<'a, I: IntoIterator<Item = &'a Session>>(sessions: I, smoothing: f64) -> MarkovChain {
        let mut alphabet = BTreeSet::new();
        let mut transitions: BTreeMap<PoiId, BTreeMap<PoiId, u32>> = BTreeMap::new();
        let mut initial: BTreeMap<PoiId, u32> = BTreeMap::new();
        for s in sessions {
            if let Some(first) = s.visits.first() {
                *initial.entry(first.poi).or_default() += 1;
            }
            for v in &s.visits {
                alphabet.insert(v.poi);
            }
            for w in s.visits.windows(2) {
                *transitions.entry(w[0].poi).or_default().entry(w[1].poi).or_default() += 1;
            }
        }
        MarkovChain { alphabet: alphabet.into_iter().collect(), transitions, initial, smoothing }
    }

    pub fn knows(&self, poi: PoiId) -> bool {
        self.alphabet.binary_search(&poi).is_ok()
    }

    fn smoothed(&self, counts: Option<&BTreeMap<PoiId, u32>>) -> Vec<(PoiId, f64)> {
        let k = self.alphabet.len() as f64;
        let n: u32 = counts.map_or(0, |c| c.values().sum());
        let denom = n as f64 + self.smoothing * k;
        self.alphabet
            .iter()
            .map(|&b| {
                let c = counts.and_then(|c| c.get(&b)).copied().unwrap_or(0) as f64;
                let p = if denom > 0.0 { (c + self.smoothing) / denom } else { 1.0 / k };
                (b, p)
            })
            .collect()
    }

    /// Next-POI distribution after `from` over the alphabet.
    pub fn row(&self, from: PoiId) -> Vec<(PoiId, f64)> {
        self.smoothed(self.transitions.get(&from))
    }

    /// Distribution of first POIs over the alphabet.
    pub fn initial_probs(&self) -> Vec<(PoiId, f64)> {
        self.smoothed(Some(&self.initial))
    }
}

/// Per-user chains with a population chain for unseen users or places.
#[derive(Clone, Debug, PartialEq)]
pub struct Markov {
    pub users: Vec<MarkovChain>,
    pub population: MarkovChain,
}

impl Markov {
    pub fn fit(sessions: &[Session], num_users: usize, smoothing: f64) -> Markov {
        let mut by_user: Vec<Vec<&Session>> = vec![Vec::new(); num_users];
        for s in sessions {
            by_user[s.user.index()].push(s);
        }
        Markov {
            users: by_user.into_iter().map(|list| MarkovChain::fit(list, smoothing)).collect(),
            population: MarkovChain::fit(sessions, smoothing),
        }
    }

    /// The chain used for a step from `from`.
    pub fn chain(&self, user: Option<UserId>, from: PoiId) -> &MarkovChain {
        match user.and_then(|u| self.users.get(u.index())) {
            Some(c) if c.knows(from) => c,
            _ => &self.population,
        }
    }

    pub fn sample_path<R: Rng>(&self, user: Option<UserId>, start: PoiId, length: usize, rng: &mut R) -> Vec<PoiId> {
        let mut out = vec![start];
        while out.len() < length {
            let cur = *out.last().expect("non-empty");
            let chain = self.chain(user, cur);
            let row = chain.row(cur);
            if row.is_empty() {
                out.push(cur);
                continue;
            }
            let probs: Vec<f64> = row.iter().map(|r| r.1).collect();
            out.push(row[sample_next(&probs, rng)].0);
        }
        out
    }
}
