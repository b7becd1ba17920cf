//! Multi-layer Elman RNN with optional attribute gating and feature injection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_input, Example, ModelKind, SequenceModel};
use crate::error::Result;
use crate::numerics::{sigmoid, softmax, xavier_uniform, Matrix, Parameters};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnnConfig {
    pub num_pois: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub attr_dim: usize,
    pub feat_dim: usize,
    /// Attribute gates plus feature paths; without them this is a plain RNN.
    pub contextual: bool,
}

impl Default for RnnConfig {
    fn default() -> Self {
        RnnConfig {
            num_pois: 0,
            embed_dim: 384,
            hidden: 256,
            layers: 5,
            attr_dim: 30,
            feat_dim: 7,
            contextual: true,
        }
    }
}

/// Context parameters of one layer: attribute gate `sigmoid(P·A + pb)` and
/// feature weights `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerContext {
    pub p: Matrix,
    pub pb: Matrix,
    pub f: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RnnLayer {
    pub u: Matrix,
    pub w: Matrix,
    pub b: Matrix,
    pub context: Option<LayerContext>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rnn {
    pub config: RnnConfig,
    pub embedding: Matrix,
    pub layers: Vec<RnnLayer>,
    pub v: Matrix,
    pub bias_out: Matrix,
    /// Output feature weights `G`.
    pub g: Option<Matrix>,
}

/// Hidden vectors per layer plus the sequence's projected features.
#[derive(Clone, Debug)]
pub struct RnnState {
    pub hidden: Vec<Vec<f64>>,
    features: Vec<f64>,
    /// `F_l · f` per layer.
    layer_features: Vec<Vec<f64>>,
    /// `G · f`.
    output_features: Vec<f64>,
}

struct LayerCache {
    gate: Vec<f64>,
    gated: Vec<f64>,
    prev: Vec<f64>,
    out: Vec<f64>,
}

struct StepCache {
    input: usize,
    layers: Vec<LayerCache>,
    probs: Vec<f64>,
}

impl Rnn {
    pub fn new<R: Rng>(config: RnnConfig, rng: &mut R) -> Rnn {
        let (h, e) = (config.hidden, config.embed_dim);
        let embedding = xavier_uniform(config.num_pois, e, rng);
        let layers = (0..config.layers)
            .map(|l| {
                let input = if l == 0 { e } else { h };
                let u = xavier_uniform(h, input, rng);
                let w = xavier_uniform(h, h, rng);
                let context = config.contextual.then(|| LayerContext {
                    p: xavier_uniform(h, config.attr_dim, rng),
                    pb: Matrix::zeros(h, 1),
                    f: xavier_uniform(h, config.feat_dim, rng),
                });
                RnnLayer { u, w, b: Matrix::zeros(h, 1), context }
            })
            .collect();
        let v = xavier_uniform(config.num_pois, h, rng);
        let g = config.contextual.then(|| xavier_uniform(config.num_pois, config.feat_dim, rng));
        Rnn { bias_out: Matrix::zeros(config.num_pois, 1), embedding, layers, v, g, config }
    }

    /// Zero-initialised parameters of the given shape.
    pub fn zeros(config: RnnConfig) -> Rnn {
        let mut r = Rnn::new(config, &mut crate::numerics::seeded(0));
        r.zero();
        r
    }

    fn begin(&self, features: &[f64]) -> RnnState {
        let h = self.config.hidden;
        let layer_features = self
            .layers
            .iter()
            .map(|l| match &l.context {
                Some(c) => c.f.matvec(features),
                None => vec![0.0; h],
            })
            .collect();
        let output_features = match &self.g {
            Some(g) => g.matvec(features),
            None => vec![0.0; self.config.num_pois],
        };
        RnnState {
            hidden: vec![vec![0.0; h]; self.layers.len()],
            features: features.to_vec(),
            layer_features,
            output_features,
        }
    }

    fn forward(&self, state: &mut RnnState, input: usize, attributes: &[f64]) -> (Vec<f64>, Vec<LayerCache>) {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x: Vec<f64> = self.embedding.row(input).to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let prev = std::mem::take(&mut state.hidden[l]);
            let (gate, gated) = match &layer.context {
                Some(ctx) => {
                    let mut pre = ctx.pb.data().to_vec();
                    ctx.p.matvec_acc(attributes, &mut pre);
                    let gate: Vec<f64> = pre.into_iter().map(sigmoid).collect();
                    let gated = prev.iter().zip(&gate).map(|(c, g)| c * g).collect();
                    (gate, gated)
                }
                None => (Vec::new(), prev.clone()),
            };
            let mut a = layer.b.data().to_vec();
            layer.u.matvec_acc(&x, &mut a);
            layer.w.matvec_acc(&gated, &mut a);
            if layer.context.is_some() {
                for (ai, fi) in a.iter_mut().zip(&state.layer_features[l]) {
                    *ai += fi;
                }
            }
            let out: Vec<f64> = a.iter().map(|v| v.tanh()).collect();
            state.hidden[l] = out.clone();
            caches.push(LayerCache { gate, gated, prev, out: out.clone() });
            x = out;
        }
        let mut logits = self.bias_out.data().to_vec();
        self.v.matvec_acc(&x, &mut logits);
        if self.g.is_some() {
            for (y, gf) in logits.iter_mut().zip(&state.output_features) {
                *y += gf;
            }
        }
        (logits, caches)
    }
}

impl Parameters for Rnn {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{i}.u"), &l.u));
            out.push((format!("layer{i}.w"), &l.w));
            out.push((format!("layer{i}.b"), &l.b));
            if let Some(c) = &l.context {
                out.push((format!("layer{i}.p"), &c.p));
                out.push((format!("layer{i}.pb"), &c.pb));
                out.push((format!("layer{i}.f"), &c.f));
            }
        }
        out.push(("v".into(), &self.v));
        out.push(("bias_out".into(), &self.bias_out));
        if let Some(g) = &self.g {
            out.push(("g".into(), g));
        }
        out
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = vec![("embedding".to_string(), &mut self.embedding)];
        for (i, l) in self.layers.iter_mut().enumerate() {
            out.push((format!("layer{i}.u"), &mut l.u));
            out.push((format!("layer{i}.w"), &mut l.w));
            out.push((format!("layer{i}.b"), &mut l.b));
            if let Some(c) = &mut l.context {
                out.push((format!("layer{i}.p"), &mut c.p));
                out.push((format!("layer{i}.pb"), &mut c.pb));
                out.push((format!("layer{i}.f"), &mut c.f));
            }
        }
        out.push(("v".into(), &mut self.v));
        out.push(("bias_out".into(), &mut self.bias_out));
        if let Some(g) = &mut self.g {
            out.push(("g".into(), g));
        }
        out
    }
}

impl SequenceModel for Rnn {
    type State = RnnState;

    fn kind(&self) -> ModelKind {
        if self.config.contextual {
            ModelKind::CapsRnn
        } else {
            ModelKind::PlainRnn
        }
    }

    fn num_pois(&self) -> usize {
        self.config.num_pois
    }

    fn gradient_buffer(&self) -> Self {
        let mut g = self.clone();
        g.zero();
        g
    }

    fn start(&self, features: &[f64]) -> RnnState {
        self.begin(features)
    }

    fn step_logits(&self, state: &mut RnnState, input: usize, attributes: &[f64]) -> Result<Vec<f64>> {
        check_input(input, self.config.num_pois)?;
        Ok(self.forward(state, input, attributes).0)
    }

    fn nll_and_grad(&self, ex: &Example, grad: &mut Rnn) -> Result<f64> {
        ex.validate(self.config.num_pois)?;
        let h = self.config.hidden;
        let n_layers = self.layers.len();
        let mut state = self.begin(&ex.features);
        let mut steps = Vec::with_capacity(ex.len());
        let mut loss = 0.0;
        for t in 0..ex.len() {
            let (logits, layers) = self.forward(&mut state, ex.inputs[t], &ex.attributes[t]);
            let probs = softmax(&logits);
            loss -= probs[ex.targets[t]].ln();
            steps.push(StepCache { input: ex.inputs[t], layers, probs });
        }

        let mut carry = vec![vec![0.0; h]; n_layers];
        let mut d_layer_features = vec![vec![0.0; h]; n_layers];
        let mut d_output_features = vec![0.0; self.config.num_pois];
        for t in (0..ex.len()).rev() {
            let step = &steps[t];
            let mut dy = step.probs.clone();
            dy[ex.targets[t]] -= 1.0;
            let top = &step.layers[n_layers - 1].out;
            grad.v.add_outer(&dy, top);
            for (b, d) in grad.bias_out.data_mut().iter_mut().zip(&dy) {
                *b += d;
            }
            for (a, d) in d_output_features.iter_mut().zip(&dy) {
                *a += d;
            }
            let mut dc = carry[n_layers - 1].clone();
            self.v.matvec_t_acc(&dy, &mut dc);
            for l in (0..n_layers).rev() {
                let cache = &step.layers[l];
                let layer = &self.layers[l];
                let da: Vec<f64> = dc.iter().zip(&cache.out).map(|(d, c)| d * (1.0 - c * c)).collect();
                let gl = &mut grad.layers[l];
                for (b, d) in gl.b.data_mut().iter_mut().zip(&da) {
                    *b += d;
                }
                let x: &[f64] = if l == 0 { self.embedding.row(step.input) } else { &step.layers[l - 1].out };
                gl.u.add_outer(&da, x);
                gl.w.add_outer(&da, &cache.gated);
                let mut dm = vec![0.0; h];
                layer.w.matvec_t_acc(&da, &mut dm);
                match (&layer.context, &mut gl.context) {
                    (Some(_), Some(gctx)) => {
                        for (acc, d) in d_layer_features[l].iter_mut().zip(&da) {
                            *acc += d;
                        }
                        let dpre: Vec<f64> = dm
                            .iter()
                            .zip(&cache.prev)
                            .zip(&cache.gate)
                            .map(|((d, c), g)| d * c * g * (1.0 - g))
                            .collect();
                        gctx.p.add_outer(&dpre, &ex.attributes[t]);
                        for (b, d) in gctx.pb.data_mut().iter_mut().zip(&dpre) {
                            *b += d;
                        }
                        carry[l] = dm.iter().zip(&cache.gate).map(|(d, g)| d * g).collect();
                    }
                    _ => carry[l] = dm,
                }
                if l == 0 {
                    let mut dx = vec![0.0; self.config.embed_dim];
                    layer.u.matvec_t_acc(&da, &mut dx);
                    for (e, d) in grad.embedding.row_mut(step.input).iter_mut().zip(&dx) {
                        *e += d;
                    }
                } else {
                    let mut below = carry[l - 1].clone();
                    layer.u.matvec_t_acc(&da, &mut below);
                    dc = below;
                }
            }
        }
        for (l, gl) in grad.layers.iter_mut().enumerate() {
            if let Some(gctx) = &mut gl.context {
                gctx.f.add_outer(&d_layer_features[l], &state.features);
            }
        }
        if let Some(g) = &mut grad.g {
            g.add_outer(&d_output_features, &state.features);
        }
        Ok(loss)
    }
}
