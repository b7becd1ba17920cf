//! One interface over every sequence recommender.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baselines::{apriori_generate, AprioriConfig, Hits, HitsConfig, Markov, Popularity};
use crate::data::{Dataset, PoiId, UserId};
use crate::error::{Error, Result};
use crate::features::FeatureTables;
use crate::generate::{generate, GenRequest, Scoring};
use crate::model::{examples_from_sessions, AnyModel, LstmConfig, ModelKind, ModelSpec, RnnConfig, TrainConfig};
use crate::numerics::{stream, derive_seed};

/// What to predict: a sequence of `length` POIs starting at `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub user: UserId,
    pub start: PoiId,
    /// Arrival at the start, UTC seconds.
    pub start_time: i64,
    pub length: usize,
}

pub trait Recommender: Send + Sync {
    fn recommend(&self, query: &Query, seed: u64) -> Result<Vec<PoiId>>;
}

/// A way of building a recommender from training data.
pub trait Method: Send + Sync {
    fn name(&self) -> String;

    fn fit(&self, train: &Dataset, tables: Arc<FeatureTables>, seed: u64) -> Result<Box<dyn Recommender>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Popularity,
    Markov,
    Apriori,
    Hits,
    #[serde(untagged)]
    Model(ModelKind),
}

impl MethodKind {
    /// Every method in report order.
    pub const ALL: [MethodKind; 8] = [
        MethodKind::Popularity,
        MethodKind::Apriori,
        MethodKind::Markov,
        MethodKind::Hits,
        MethodKind::Model(ModelKind::PlainRnn),
        MethodKind::Model(ModelKind::Lstm),
        MethodKind::Model(ModelKind::CapsRnn),
        MethodKind::Model(ModelKind::CapsLstm),
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MethodKind::Popularity => "popularity",
            MethodKind::Markov => "markov",
            MethodKind::Apriori => "apriori",
            MethodKind::Hits => "hits",
            MethodKind::Model(k) => k.tag(),
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            MethodKind::Popularity => "POI-Popularity",
            MethodKind::Markov => "POI-Markov",
            MethodKind::Apriori => "Apriori",
            MethodKind::Hits => "HITS",
            MethodKind::Model(ModelKind::PlainRnn) => "Vanilla RNN",
            MethodKind::Model(ModelKind::Lstm) => "LSTM",
            MethodKind::Model(ModelKind::CapsRnn) => "CAPS-RNN",
            MethodKind::Model(ModelKind::CapsLstm) => "CAPS-LSTM",
        }
    }

    /// Parse a comma-separated list; `all` selects every method.
    pub fn parse_list(s: &str) -> std::result::Result<Vec<MethodKind>, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(MethodKind::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.dedup();
        if out.is_empty() {
            return Err("no methods selected".into());
        }
        Ok(out)
    }
}

impl std::str::FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MethodKind::ALL.into_iter().find(|m| m.tag() == s).ok_or_else(|| {
            let names: Vec<&str> = MethodKind::ALL.iter().map(|m| m.tag()).collect();
            format!("unknown method {s:?} (expected one of {} or all)", names.join(", "))
        })
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Hyperparameters of every built-in method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub popularity_radius_km: f64,
    pub popularity_growth: f64,
    pub markov_smoothing: f64,
    pub apriori: AprioriConfig,
    pub hits: HitsConfig,
    /// Layer shapes for RNN models; `num_pois` and `contextual` are filled in per run.
    pub rnn: RnnConfig,
    pub lstm: LstmConfig,
    pub train: TrainConfig,
    /// Sampled rollouts per query for neural models.
    pub candidates: usize,
    pub scoring: Scoring,
}

impl Default for MethodSettings {
    fn default() -> Self {
        MethodSettings {
            popularity_radius_km: 2.0,
            popularity_growth: 1.5,
            markov_smoothing: 1.0,
            apriori: AprioriConfig::default(),
            hits: HitsConfig::default(),
            rnn: RnnConfig::default(),
            lstm: LstmConfig::default(),
            train: TrainConfig::default(),
            candidates: 10,
            scoring: Scoring::Preference,
        }
    }
}

/// Named starting points for [`MethodSettings`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Full-size networks: embedding 384, five 256-unit RNN layers, 512-unit
    /// LSTM, learning rate 0.002, batches of 50, 100 epochs.
    #[default]
    Full,
    /// The same architecture at one eighth of the width (embedding 48, five
    /// 32-unit RNN layers, 64-unit LSTM) trained with learning rate 0.1,
    /// batches of 10 and 30 epochs; minutes on one core for a few hundred
    /// places.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Preset::Full),
            "desk" => Ok(Preset::Desk),
            _ => Err(format!("unknown preset {s:?} (expected full or desk)")),
        }
    }
}

impl MethodSettings {
    pub fn preset(preset: Preset) -> MethodSettings {
        let mut s = MethodSettings::default();
        if preset == Preset::Desk {
            s.rnn.embed_dim = 48;
            s.rnn.hidden = 32;
            s.lstm.embed_dim = 48;
            s.lstm.hidden = 64;
            s.train.sgd.learning_rate = 0.1;
            s.train.sgd.batch_size = 10;
            s.train.sgd.epochs = 30;
        }
        s
    }

    /// Shape of the network for `kind` over `num_pois` places.
    pub fn model_spec(&self, kind: ModelKind, num_pois: usize) -> ModelSpec {
        match kind {
            ModelKind::PlainRnn | ModelKind::CapsRnn => ModelSpec::Rnn(RnnConfig {
                num_pois,
                contextual: kind.is_contextual(),
                ..self.rnn.clone()
            }),
            ModelKind::Lstm | ModelKind::CapsLstm => ModelSpec::Lstm(LstmConfig {
                num_pois,
                contextual: kind.is_contextual(),
                ..self.lstm.clone()
            }),
        }
    }
}

/// A built-in method with its settings.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub kind: MethodKind,
    pub settings: Arc<MethodSettings>,
}

struct PopularityRec(Popularity);

impl Recommender for PopularityRec {
    fn recommend(&self, q: &Query, _seed: u64) -> Result<Vec<PoiId>> {
        Ok(self.0.sequence(q.start, q.length))
    }
}

struct MarkovRec(Markov);

impl Recommender for MarkovRec {
    fn recommend(&self, q: &Query, seed: u64) -> Result<Vec<PoiId>> {
        Ok(self.0.sample_path(Some(q.user), q.start, q.length, &mut stream(seed, 0)))
    }
}

struct AprioriRec {
    tables: Arc<FeatureTables>,
    config: AprioriConfig,
}

impl Recommender for AprioriRec {
    fn recommend(&self, q: &Query, _seed: u64) -> Result<Vec<PoiId>> {
        let user = (q.user.index() < self.tables.num_users).then_some(q.user);
        let best = apriori_generate(&self.tables, user, q.start, q.start_time, q.length, &self.config, 1);
        Ok(best.into_iter().next().map(|t| t.pois).unwrap_or_else(|| vec![q.start]))
    }
}

struct HitsRec(Hits);

impl Recommender for HitsRec {
    fn recommend(&self, q: &Query, _seed: u64) -> Result<Vec<PoiId>> {
        Ok(self.0.rank(q.start, q.length, 1).into_iter().next().map(|c| c.0).unwrap_or_else(|| vec![q.start]))
    }
}

/// Trained network answering queries with its best sampled rollout.
pub struct ModelRec {
    pub model: AnyModel,
    pub tables: Arc<FeatureTables>,
    pub candidates: usize,
    pub scoring: Scoring,
}

impl Recommender for ModelRec {
    fn recommend(&self, q: &Query, seed: u64) -> Result<Vec<PoiId>> {
        let user = (q.user.index() < self.tables.num_users).then_some(q.user);
        let req = GenRequest {
            length: q.length,
            candidates: self.candidates.max(1),
            k: 1,
            scoring: self.scoring,
            ..GenRequest::new(user, q.start, q.start_time)
        };
        let out = match &self.model {
            AnyModel::Rnn(m) => generate(m, &self.tables, &req, seed)?,
            AnyModel::Lstm(m) => generate(m, &self.tables, &req, seed)?,
        };
        out.into_iter().next().map(|g| g.pois).ok_or(Error::Exhausted)
    }
}

/// Train a network of `kind` on every multi-visit session of `train`.
pub fn train_model(
    kind: ModelKind,
    settings: &MethodSettings,
    train: &Dataset,
    tables: &FeatureTables,
    seed: u64,
) -> Result<(AnyModel, Vec<f64>)> {
    let examples = examples_from_sessions(tables, &train.sessions, settings.train.max_len)?;
    let spec = settings.model_spec(kind, train.num_pois());
    let mut model = AnyModel::new(&spec, &mut stream(seed, 0));
    let report = model.train(&examples, &settings.train, derive_seed(seed, &[1]))?;
    Ok((model, report.loss_curve))
}

impl Method for Builtin {
    fn name(&self) -> String {
        self.kind.tag().to_string()
    }

    fn fit(&self, train: &Dataset, tables: Arc<FeatureTables>, seed: u64) -> Result<Box<dyn Recommender>> {
        let s = &self.settings;
        Ok(match self.kind {
            MethodKind::Popularity => Box::new(PopularityRec(Popularity::fit(
                &train.sessions,
                &train.pois,
                s.popularity_radius_km,
                s.popularity_growth,
            ))),
            MethodKind::Markov => Box::new(MarkovRec(Markov::fit(&train.sessions, train.num_users(), s.markov_smoothing))),
            MethodKind::Apriori => Box::new(AprioriRec { tables, config: s.apriori.clone() }),
            MethodKind::Hits => Box::new(HitsRec(Hits::fit(&train.sessions, &train.pois, &s.hits))),
            MethodKind::Model(kind) => {
                let (model, curve) = train_model(kind, s, train, &tables, seed)?;
                log::info!(
                    "{kind}: loss {:.4} -> {:.4}",
                    curve.first().copied().unwrap_or(f64::NAN),
                    curve.last().copied().unwrap_or(f64::NAN)
                );
                Box::new(ModelRec { model, tables, candidates: s.candidates, scoring: s.scoring })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_lists() {
        assert_eq!(MethodKind::parse_list("all").unwrap().len(), 8);
        assert_eq!(
            MethodKind::parse_list("popularity, caps-lstm").unwrap(),
            vec![MethodKind::Popularity, MethodKind::Model(ModelKind::CapsLstm)]
        );
        assert!(MethodKind::parse_list("nope").is_err());
    }
}
