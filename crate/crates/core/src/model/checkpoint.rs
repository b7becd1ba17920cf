//! Binary parameter snapshot plus a JSON sidecar describing the model.

use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Example, Lstm, LstmConfig, ModelKind, Rnn, RnnConfig, SequenceModel, TrainConfig};
use crate::data::Encodings;
use crate::error::{Error, Result};
use crate::numerics::{read_snapshot_into, write_snapshot, Parameters};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Rnn(RnnConfig),
    Lstm(LstmConfig),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Rnn(c) if c.contextual => ModelKind::CapsRnn,
            ModelSpec::Rnn(_) => ModelKind::PlainRnn,
            ModelSpec::Lstm(c) if c.contextual => ModelKind::CapsLstm,
            ModelSpec::Lstm(_) => ModelKind::Lstm,
        }
    }
}

/// Either model family behind one type.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Rnn(Rnn),
    Lstm(Lstm),
}

impl AnyModel {
    pub fn new<R: Rng>(spec: &ModelSpec, rng: &mut R) -> AnyModel {
        match spec {
            ModelSpec::Rnn(c) => AnyModel::Rnn(Rnn::new(c.clone(), rng)),
            ModelSpec::Lstm(c) => AnyModel::Lstm(Lstm::new(c.clone(), rng)),
        }
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            AnyModel::Rnn(m) => ModelSpec::Rnn(m.config.clone()),
            AnyModel::Lstm(m) => ModelSpec::Lstm(m.config.clone()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            AnyModel::Rnn(m) => m.kind(),
            AnyModel::Lstm(m) => m.kind(),
        }
    }

    pub fn num_pois(&self) -> usize {
        match self {
            AnyModel::Rnn(m) => m.num_pois(),
            AnyModel::Lstm(m) => m.num_pois(),
        }
    }

    pub fn train(&mut self, examples: &[Example], cfg: &TrainConfig, seed: u64) -> Result<super::TrainReport> {
        match self {
            AnyModel::Rnn(m) => super::train(m, examples, cfg, seed),
            AnyModel::Lstm(m) => super::train(m, examples, cfg, seed),
        }
    }

    pub fn nll(&self, ex: &Example) -> Result<f64> {
        match self {
            AnyModel::Rnn(m) => m.nll(ex),
            AnyModel::Lstm(m) => m.nll(ex),
        }
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut crate::numerics::Matrix)> {
        match self {
            AnyModel::Rnn(m) => m.blocks_mut(),
            AnyModel::Lstm(m) => m.blocks_mut(),
        }
    }
}

/// Everything needed to rebuild and identify a trained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub spec: ModelSpec,
    pub train: TrainConfig,
    pub seed: u64,
    /// SHA-256 of the JSON-serialised encodings the model was trained with.
    pub encodings_sha256: String,
    pub loss_curve: Vec<f64>,
}

const FORMAT: &str = "caps-model";

impl Checkpoint {
    pub fn new(model: &AnyModel, train: TrainConfig, seed: u64, encodings: &Encodings, loss_curve: Vec<f64>) -> Result<Checkpoint> {
        Ok(Checkpoint {
            format: FORMAT.into(),
            version: 1,
            kind: model.kind(),
            spec: model.spec(),
            train,
            seed,
            encodings_sha256: encodings_digest(encodings)?,
            loss_curve,
        })
    }
}

pub fn encodings_digest(enc: &Encodings) -> Result<String> {
    let bytes = serde_json::to_vec(enc)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write `path` (binary parameters) and the sidecar next to it with a
/// `.json` extension.
pub fn save_checkpoint(path: &Path, model: &AnyModel, meta: &Checkpoint) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let w = BufWriter::new(file);
    match model {
        AnyModel::Rnn(m) => write_snapshot(m, w),
        AnyModel::Lstm(m) => write_snapshot(m, w),
    }
    .map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

/// Load a checkpoint; when `encodings` is given its digest must match.
pub fn load_checkpoint(path: &Path, encodings: Option<&Encodings>) -> Result<(AnyModel, Checkpoint)> {
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: Checkpoint = serde_json::from_str(&text)?;
    if meta.format != FORMAT {
        return Err(Error::Snapshot(format!("{} is not a model sidecar", side.display())));
    }
    if let Some(enc) = encodings {
        if encodings_digest(enc)? != meta.encodings_sha256 {
            return Err(Error::Snapshot("model was trained with different encodings".into()));
        }
    }
    let mut model = AnyModel::new(&meta.spec, &mut crate::numerics::seeded(0));
    for (_, m) in model.blocks_mut() {
        m.fill(0.0);
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let r = BufReader::new(file);
    match &mut model {
        AnyModel::Rnn(m) => read_snapshot_into(m, r)?,
        AnyModel::Lstm(m) => read_snapshot_into(m, r)?,
    }
    Ok((model, meta))
}
