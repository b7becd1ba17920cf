//! K-fold cross-validation over held-out sessions.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{displacement, diversity, pairs_f1};
use crate::data::{Dataset, PoiId, Session};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureTables};
use crate::numerics::{derive_seed, stream};
use crate::recommend::{Method, Query};

/// Metrics of one method, for one fold or averaged over folds (`fold` is `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub fold: Option<usize>,
    pub sessions: usize,
    pub precision: f64,
    pub recall: f64,
    pub pairs_f1: f64,
    pub diversity: f64,
    pub diversity_raw: f64,
    pub displacement_sum_km: f64,
    pub displacement_mean_km: f64,
    /// Fitting plus answering every query.
    pub seconds: f64,
}

/// Mean diversity and displacement for generated sequences of one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub model: String,
    pub length: usize,
    pub sessions: usize,
    pub diversity: f64,
    pub displacement_mean_km: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub features: FeatureConfig,
    /// Extra generation lengths evaluated on each held-out session.
    pub sweep_lengths: Vec<usize>,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 5, seed: 7, features: FeatureConfig::default(), sweep_lengths: Vec::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CvResult {
    /// One row per method per fold.
    pub folds: Vec<EvalReport>,
    /// One row per method, averaged over folds with at least one session.
    pub aggregate: Vec<EvalReport>,
    pub sweep: Vec<SweepPoint>,
}

/// Held-out fold of every session, or `None` for sessions that are never
/// tested (singletons and sessions of users with fewer than `folds`
/// multi-visit sessions). Untested sessions stay in every training split.
pub fn assign_folds(sessions: &[Session], num_users: usize, folds: usize, seed: u64) -> Vec<Option<usize>> {
    let mut per_user: Vec<Vec<usize>> = vec![Vec::new(); num_users];
    for (i, s) in sessions.iter().enumerate() {
        if s.is_trainable() {
            per_user[s.user.index()].push(i);
        }
    }
    let mut out = vec![None; sessions.len()];
    let mut excluded = 0;
    for (u, mut idx) in per_user.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < folds {
            excluded += 1;
            continue;
        }
        idx.shuffle(&mut stream(seed, u as u64));
        for (k, i) in idx.into_iter().enumerate() {
            out[i] = Some(k % folds);
        }
    }
    if excluded > 0 {
        log::warn!("{excluded} users have fewer than {folds} multi-visit sessions and are not tested");
    }
    out
}

#[derive(Clone, Copy, Default)]
struct Sums {
    n: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    diversity: f64,
    diversity_raw: f64,
    disp_sum: f64,
    disp_mean: f64,
}

impl Sums {
    fn add(mut self, o: Sums) -> Sums {
        self.n += o.n;
        self.precision += o.precision;
        self.recall += o.recall;
        self.f1 += o.f1;
        self.diversity += o.diversity;
        self.diversity_raw += o.diversity_raw;
        self.disp_sum += o.disp_sum;
        self.disp_mean += o.disp_mean;
        self
    }
}

fn score(data: &Dataset, actual: &[PoiId], predicted: &[PoiId]) -> Sums {
    let p = pairs_f1(actual, predicted);
    let cats: Vec<_> = predicted.iter().map(|&q| data.poi(q).category).collect();
    let (div, raw) = diversity(&cats).map_or((0.0, 0.0), |d| (d.normalized, d.dissimilar_pairs as f64));
    let d = displacement(&data.pois, actual, predicted);
    Sums {
        n: 1,
        precision: p.precision,
        recall: p.recall,
        f1: p.f1,
        diversity: div,
        diversity_raw: raw,
        disp_sum: d.sum_km,
        disp_mean: d.mean_km,
    }
}

fn query_for(s: &Session, length: usize) -> Query {
    let first = s.visits[0];
    Query { user: s.user, start: first.poi, start_time: first.arrival, length }
}

/// Run every method over every fold. Per-query seeds depend only on the fold
/// and session, so all methods answer a query with the same seed.
pub fn cross_validate(data: &Dataset, methods: &[Box<dyn Method>], cfg: &CvConfig) -> Result<CvResult> {
    if cfg.folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {}", cfg.folds)));
    }
    let assignment = assign_folds(&data.sessions, data.num_users(), cfg.folds, cfg.seed);
    if assignment.iter().all(Option::is_none) {
        return Err(Error::Invalid(format!("no user has {} multi-visit sessions to cross-validate", cfg.folds)));
    }
    let mut result = CvResult::default();
    let mut sweep_sums = vec![vec![(0usize, 0.0, 0.0); cfg.sweep_lengths.len()]; methods.len()];
    for fold in 0..cfg.folds {
        let train: Vec<Session> = data
            .sessions
            .iter()
            .zip(&assignment)
            .filter(|(_, a)| **a != Some(fold))
            .map(|(s, _)| s.clone())
            .collect();
        let test: Vec<usize> = (0..data.sessions.len()).filter(|&i| assignment[i] == Some(fold)).collect();
        let train = data.with_sessions(train);
        let tables = Arc::new(FeatureTables::build(&train, &cfg.features));
        log::info!("fold {fold}: {} training sessions, {} held out", train.sessions.len(), test.len());
        for (m, method) in methods.iter().enumerate() {
            let started = Instant::now();
            let rec = method.fit(&train, Arc::clone(&tables), derive_seed(cfg.seed, &[1, fold as u64, m as u64]))?;
            let per_session: Vec<Sums> = test
                .par_iter()
                .map(|&i| {
                    let s = &data.sessions[i];
                    let actual: Vec<PoiId> = s.pois().collect();
                    let seed = derive_seed(cfg.seed, &[2, fold as u64, i as u64]);
                    let predicted = rec.recommend(&query_for(s, actual.len()), seed)?;
                    Ok(score(data, &actual, &predicted))
                })
                .collect::<Result<_>>()?;
            for (j, &len) in cfg.sweep_lengths.iter().enumerate() {
                let points: Vec<(f64, f64)> = test
                    .par_iter()
                    .map(|&i| {
                        let s = &data.sessions[i];
                        let seed = derive_seed(cfg.seed, &[3, fold as u64, i as u64, len as u64]);
                        let predicted = rec.recommend(&query_for(s, len), seed)?;
                        let actual: Vec<PoiId> = s.pois().collect();
                        let n = actual.len().min(predicted.len());
                        let cats: Vec<_> = predicted.iter().map(|&q| data.poi(q).category).collect();
                        let div = diversity(&cats).map_or(0.0, |d| d.normalized);
                        Ok((div, displacement(&data.pois, &actual[..n], &predicted[..n]).mean_km))
                    })
                    .collect::<Result<_>>()?;
                let acc = &mut sweep_sums[m][j];
                for (div, disp) in points {
                    acc.0 += 1;
                    acc.1 += div;
                    acc.2 += disp;
                }
            }
            let total = per_session.into_iter().fold(Sums::default(), Sums::add);
            let n = total.n.max(1) as f64;
            result.folds.push(EvalReport {
                model: method.name(),
                fold: Some(fold),
                sessions: total.n,
                precision: total.precision / n,
                recall: total.recall / n,
                pairs_f1: total.f1 / n,
                diversity: total.diversity / n,
                diversity_raw: total.diversity_raw / n,
                displacement_sum_km: total.disp_sum / n,
                displacement_mean_km: total.disp_mean / n,
                seconds: started.elapsed().as_secs_f64(),
            });
        }
    }
    for method in methods {
        let name = method.name();
        let rows: Vec<&EvalReport> = result.folds.iter().filter(|r| r.model == name).collect();
        result.aggregate.push(average(&name, &rows));
    }
    for (m, method) in methods.iter().enumerate() {
        for (j, &length) in cfg.sweep_lengths.iter().enumerate() {
            let (n, div, disp) = sweep_sums[m][j];
            let d = n.max(1) as f64;
            result.sweep.push(SweepPoint {
                model: method.name(),
                length,
                sessions: n,
                diversity: div / d,
                displacement_mean_km: disp / d,
            });
        }
    }
    Ok(result)
}

fn average(name: &str, rows: &[&EvalReport]) -> EvalReport {
    let used: Vec<&&EvalReport> = rows.iter().filter(|r| r.sessions > 0).collect();
    let k = used.len().max(1) as f64;
    let mean = |f: fn(&EvalReport) -> f64| used.iter().map(|r| f(r)).sum::<f64>() / k;
    EvalReport {
        model: name.to_string(),
        fold: None,
        sessions: rows.iter().map(|r| r.sessions).sum(),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        pairs_f1: mean(|r| r.pairs_f1),
        diversity: mean(|r| r.diversity),
        diversity_raw: mean(|r| r.diversity_raw),
        displacement_sum_km: mean(|r| r.displacement_sum_km),
        displacement_mean_km: mean(|r| r.displacement_mean_km),
        seconds: rows.iter().map(|r| r.seconds).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_dataset, IngestConfig, SynthConfig};
    use crate::recommend::Recommender;

    struct Oracle(Vec<Session>);

    impl Recommender for Oracle {
        fn recommend(&self, q: &Query, _seed: u64) -> Result<Vec<PoiId>> {
            let s = self.0.iter().find(|s| s.user == q.user && s.start == q.start_time).expect("known session");
            Ok(s.pois().take(q.length).collect())
        }
    }

    struct OracleMethod(Vec<Session>);

    impl Method for OracleMethod {
        fn name(&self) -> String {
            "oracle".into()
        }

        fn fit(&self, _: &Dataset, _: Arc<FeatureTables>, _: u64) -> Result<Box<dyn Recommender>> {
            Ok(Box::new(Oracle(self.0.clone())))
        }
    }

    fn small() -> Dataset {
        let s = synth_dataset(&SynthConfig { seed: 3, n_users: 8, n_pois: 40, days: 10 });
        Dataset::from_records(&s.records, &s.friendships, &IngestConfig { min_checkins: 5, ..Default::default() })
    }

    #[test]
    fn folds_are_deterministic_and_balanced() {
        let data = small();
        let a = assign_folds(&data.sessions, data.num_users(), 5, 11);
        assert_eq!(a, assign_folds(&data.sessions, data.num_users(), 5, 11));
        for u in 0..data.num_users() {
            let mut counts = [0usize; 5];
            for (s, f) in data.sessions.iter().zip(&a) {
                if let (true, Some(f)) = (s.user.index() == u, f) {
                    counts[*f] += 1;
                }
            }
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "user {u}: {counts:?}");
        }
    }

    #[test]
    fn perfect_oracle_scores_one() {
        let data = small();
        let methods: Vec<Box<dyn Method>> = vec![Box::new(OracleMethod(data.sessions.clone()))];
        let out = cross_validate(&data, &methods, &CvConfig { sweep_lengths: vec![2], ..Default::default() }).unwrap();
        assert_eq!(out.folds.len(), 5);
        let agg = &out.aggregate[0];
        assert!(agg.sessions > 0);
        assert_eq!(agg.pairs_f1, 1.0);
        assert_eq!(agg.displacement_sum_km, 0.0);
        assert_eq!(out.sweep[0].displacement_mean_km, 0.0);
    }
}
