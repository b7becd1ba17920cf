//! Free-running sequence generation from a trained model.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{hour_of_day, PoiId, UserId};
use crate::error::{Error, Result};
use crate::features::FeatureTables;
use crate::model::SequenceModel;
use crate::numerics::stream;

/// How candidate sequences are scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scoring {
    /// Sum of preference scores.
    #[default]
    Preference,
    /// Sum of constraint-discounted preference scores.
    Consolidated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenRequest {
    /// `None` scores with population preferences.
    pub user: Option<UserId>,
    pub start: PoiId,
    /// Arrival time at the start, UTC seconds; only the time of day matters.
    pub start_time: i64,
    pub length: usize,
    pub candidates: usize,
    pub k: usize,
    pub no_repeat: bool,
    pub scoring: Scoring,
}

impl GenRequest {
    pub fn new(user: Option<UserId>, start: PoiId, start_time: i64) -> GenRequest {
        GenRequest {
            user,
            start,
            start_time,
            length: 25,
            candidates: 10,
            k: 10,
            no_repeat: false,
            scoring: Scoring::Preference,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Config("sequence length must be at least 1".into()));
        }
        if self.k == 0 || self.candidates < self.k {
            return Err(Error::Config(format!("need 1 <= k <= candidates, got k={} candidates={}", self.k, self.candidates)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSequence {
    pub pois: Vec<PoiId>,
    /// Model probability of each sampled element (1 for the given start).
    pub probabilities: Vec<f64>,
    /// Estimated arrival time of each element.
    pub arrivals: Vec<i64>,
    pub score: f64,
    /// Position among the sampled candidates.
    pub index: usize,
}

/// Draw an index from a categorical distribution.
pub fn sample_next<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        if u < p {
            return i;
        }
        u -= p;
        last = i;
    }
    last
}

/// Sum of per-element scores along a sequence with known arrival times.
pub fn sequence_score(tables: &FeatureTables, user: Option<UserId>, pois: &[PoiId], arrivals: &[i64], scoring: Scoring) -> f64 {
    pois.iter()
        .zip(arrivals)
        .enumerate()
        .map(|(i, (&p, &t))| {
            let hour = hour_of_day(t);
            match scoring {
                Scoring::Preference => tables.preference(user, p, hour),
                Scoring::Consolidated => tables.consolidated(user, p, hour, i.checked_sub(1).map(|j| pois[j])),
            }
        })
        .sum()
}

/// Arrival time at `next` after staying at `cur`.
pub fn advance(tables: &FeatureTables, time: i64, cur: PoiId, next: PoiId) -> i64 {
    time + (tables.stay.seconds(cur) + tables.travel_secs(cur, next)).round() as i64
}

fn rollout<M: SequenceModel>(model: &M, tables: &FeatureTables, req: &GenRequest, seed: u64, index: usize) -> Result<GeneratedSequence> {
    let mut rng = stream(seed, index as u64);
    let start_hour = hour_of_day(req.start_time);
    let features = tables.feature_input(&tables.estimate_features(req.user, req.start, start_hour)?);
    let mut state = model.start(&features);
    let mut pois = vec![req.start];
    let mut probabilities = vec![1.0];
    let mut arrivals = vec![req.start_time];
    let mut prev = None;
    while pois.len() < req.length {
        let cur = *pois.last().expect("non-empty");
        let time = *arrivals.last().expect("non-empty");
        let attrs = tables.attribute_input(&tables.attribute_vector(cur, hour_of_day(time), prev)?);
        let mut probs = model.step(&mut state, cur.index(), &attrs)?;
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("output distribution".into()));
        }
        let raw = probs.clone();
        if req.no_repeat {
            for p in &pois {
                probs[p.index()] = 0.0;
            }
            if probs.iter().sum::<f64>() <= 0.0 {
                probs = raw.clone();
            }
        }
        let next = sample_next(&probs, &mut rng);
        let next = PoiId::from(next);
        probabilities.push(raw[next.index()]);
        arrivals.push(advance(tables, time, cur, next));
        pois.push(next);
        prev = Some(cur);
    }
    let score = sequence_score(tables, req.user, &pois, &arrivals, req.scoring);
    Ok(GeneratedSequence { pois, probabilities, arrivals, score, index })
}

/// Sample `req.candidates` rollouts and return the `req.k` best by score,
/// ties going to the earlier candidate.
pub fn generate<M: SequenceModel>(model: &M, tables: &FeatureTables, req: &GenRequest, seed: u64) -> Result<Vec<GeneratedSequence>> {
    req.validate()?;
    if req.start.index() >= model.num_pois() {
        return Err(Error::PoiOutOfRange { index: req.start.index(), size: model.num_pois() });
    }
    let mut all = (0..req.candidates)
        .into_par_iter()
        .map(|i| rollout(model, tables, req, seed, i))
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    all.truncate(req.k);
    Ok(all)
}
