//! Recurrent next-POI models and their training loop.

mod checkpoint;
mod lstm;
mod rnn;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, save_checkpoint, AnyModel, Checkpoint, ModelSpec};
pub use lstm::{GateWeights, Lstm, LstmConfig, LstmContext, LstmState, LstmStep};
pub use rnn::{LayerContext, Rnn, RnnConfig, RnnLayer, RnnState};
pub use train::{examples_from_sessions, train, TrainConfig, TrainReport, MAX_SEQUENCE_LEN};

use crate::error::{Error, Result};
use crate::numerics::{softmax, Parameters};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    PlainRnn,
    CapsRnn,
    Lstm,
    CapsLstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::PlainRnn, ModelKind::CapsRnn, ModelKind::Lstm, ModelKind::CapsLstm];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::PlainRnn => "plain-rnn",
            ModelKind::CapsRnn => "caps-rnn",
            ModelKind::Lstm => "lstm",
            ModelKind::CapsLstm => "caps-lstm",
        }
    }

    pub fn is_contextual(self) -> bool {
        matches!(self, ModelKind::CapsRnn | ModelKind::CapsLstm)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| format!("unknown model kind {s:?} (expected plain-rnn, caps-rnn, lstm or caps-lstm)"))
    }
}

/// One teacher-forced training sequence: `inputs[t]` predicts `targets[t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub inputs: Vec<usize>,
    pub targets: Vec<usize>,
    /// Encoded attribute vector of each input.
    pub attributes: Vec<Vec<f64>>,
    /// Encoded feature vector of the whole sequence.
    pub features: Vec<f64>,
}

impl Example {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn validate(&self, num_pois: usize) -> Result<()> {
        if self.inputs.len() != self.targets.len() || self.inputs.len() != self.attributes.len() {
            return Err(Error::Invalid(format!(
                "example has {} inputs, {} targets and {} attribute rows",
                self.inputs.len(),
                self.targets.len(),
                self.attributes.len()
            )));
        }
        for &p in self.inputs.iter().chain(&self.targets) {
            check_input(p, num_pois)?;
        }
        Ok(())
    }

    /// Random `len`-step sequence for exercising model internals.
    pub fn random<R: Rng>(num_pois: usize, len: usize, attr_dim: usize, feat_dim: usize, rng: &mut R) -> Example {
        let items: Vec<usize> = (0..=len).map(|_| rng.gen_range(0..num_pois)).collect();
        Example {
            inputs: items[..len].to_vec(),
            targets: items[1..].to_vec(),
            attributes: (0..len).map(|_| (0..attr_dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            features: (0..feat_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }
}

fn check_input(index: usize, num_pois: usize) -> Result<()> {
    if index < num_pois {
        Ok(())
    } else {
        Err(Error::PoiOutOfRange { index, size: num_pois })
    }
}

/// A next-POI model trained by teacher forcing.
pub trait SequenceModel: Parameters + Clone + Send + Sync + Sized {
    type State: Clone + Send;

    fn kind(&self) -> ModelKind;

    fn num_pois(&self) -> usize;

    /// Zeroed parameters of the same shape, for accumulating gradients.
    fn gradient_buffer(&self) -> Self;

    /// Fresh recurrent state for a sequence with the given encoded features.
    fn start(&self, features: &[f64]) -> Self::State;

    /// Advance one step and return the output logits.
    fn step_logits(&self, state: &mut Self::State, input: usize, attributes: &[f64]) -> Result<Vec<f64>>;

    /// Advance one step and return the next-POI distribution.
    fn step(&self, state: &mut Self::State, input: usize, attributes: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.step_logits(state, input, attributes)?))
    }

    /// Sequence negative log-likelihood; adds its gradient into `grad`.
    fn nll_and_grad(&self, ex: &Example, grad: &mut Self) -> Result<f64>;

    /// Sequence negative log-likelihood, `-sum_t ln p(target_t)`.
    fn nll(&self, ex: &Example) -> Result<f64> {
        ex.validate(self.num_pois())?;
        let mut state = self.start(&ex.features);
        let mut loss = 0.0;
        for t in 0..ex.len() {
            let p = self.step(&mut state, ex.inputs[t], &ex.attributes[t])?;
            loss -= p[ex.targets[t]].ln();
        }
        Ok(loss)
    }
}
