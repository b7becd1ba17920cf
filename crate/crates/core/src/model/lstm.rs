//! Single-layer peephole LSTM with optional attribute gating of the
//! recurrent input and feature injection into every gate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_input, Example, ModelKind, SequenceModel};
use crate::error::Result;
use crate::numerics::{seeded, sigmoid, softmax, xavier_uniform, Matrix, Parameters};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub num_pois: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub attr_dim: usize,
    pub feat_dim: usize,
    pub contextual: bool,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            num_pois: 0,
            embed_dim: 384,
            hidden: 512,
            attr_dim: 30,
            feat_dim: 7,
            contextual: true,
        }
    }
}

/// Input, recurrent and bias weights of one gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GateWeights {
    pub w: Matrix,
    pub wh: Matrix,
    pub b: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmContext {
    /// Attribute gate projection `sigmoid(P·A + pb)`.
    pub p: Matrix,
    pub pb: Matrix,
    /// Feature weights shared by all four gates.
    pub w_feat: Matrix,
    /// Output feature weights `G`.
    pub g: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lstm {
    pub config: LstmConfig,
    pub embedding: Matrix,
    pub input: GateWeights,
    pub forget: GateWeights,
    pub cell: GateWeights,
    pub output: GateWeights,
    /// Diagonal peepholes on the previous cell state.
    pub peep_i: Matrix,
    pub peep_f: Matrix,
    pub peep_o: Matrix,
    pub v: Matrix,
    pub bias_out: Matrix,
    pub context: Option<LstmContext>,
}

#[derive(Clone, Debug)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    features: Vec<f64>,
    /// `W_feat · F`.
    gate_features: Vec<f64>,
    /// `G · F`.
    output_features: Vec<f64>,
}

/// Every intermediate vector of one step.
#[derive(Clone, Debug)]
pub struct LstmStep {
    pub gate: Vec<f64>,
    pub m: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub z: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub logits: Vec<f64>,
}

fn gate_weights<R: Rng>(h: usize, e: usize, bias: f64, rng: &mut R) -> GateWeights {
    GateWeights {
        w: xavier_uniform(h, e, rng),
        wh: xavier_uniform(h, h, rng),
        b: Matrix::filled(h, 1, bias),
    }
}

impl GateWeights {
    /// `b + W x + W_h m` in that order.
    fn pre(&self, x: &[f64], m: &[f64]) -> Vec<f64> {
        let mut a = self.b.data().to_vec();
        self.w.matvec_acc(x, &mut a);
        self.wh.matvec_acc(m, &mut a);
        a
    }

    fn accumulate(&mut self, da: &[f64], x: &[f64], m: &[f64]) {
        self.w.add_outer(da, x);
        self.wh.add_outer(da, m);
        for (b, d) in self.b.data_mut().iter_mut().zip(da) {
            *b += d;
        }
    }
}

fn add_into(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn peephole(a: &mut [f64], w: &Matrix, c: &[f64]) {
    for ((x, w), c) in a.iter_mut().zip(w.data()).zip(c) {
        *x += w * c;
    }
}

impl Lstm {
    pub fn new<R: Rng>(config: LstmConfig, rng: &mut R) -> Lstm {
        let (h, e, k) = (config.hidden, config.embed_dim, config.num_pois);
        let embedding = xavier_uniform(k, e, rng);
        let input = gate_weights(h, e, 0.0, rng);
        let forget = gate_weights(h, e, 1.0, rng);
        let cell = gate_weights(h, e, 0.0, rng);
        let output = gate_weights(h, e, 0.0, rng);
        let v = xavier_uniform(k, h, rng);
        let context = config.contextual.then(|| LstmContext {
            p: xavier_uniform(h, config.attr_dim, rng),
            pb: Matrix::zeros(h, 1),
            w_feat: xavier_uniform(h, config.feat_dim, rng),
            g: xavier_uniform(k, config.feat_dim, rng),
        });
        Lstm {
            embedding,
            input,
            forget,
            cell,
            output,
            peep_i: Matrix::zeros(h, 1),
            peep_f: Matrix::zeros(h, 1),
            peep_o: Matrix::zeros(h, 1),
            v,
            bias_out: Matrix::zeros(k, 1),
            context,
            config,
        }
    }

    pub fn zeros(config: LstmConfig) -> Lstm {
        let mut m = Lstm::new(config, &mut seeded(0));
        m.zero();
        m
    }

    fn begin(&self, features: &[f64]) -> LstmState {
        let h = self.config.hidden;
        let (gate_features, output_features) = match &self.context {
            Some(ctx) => (ctx.w_feat.matvec(features), ctx.g.matvec(features)),
            None => (vec![0.0; h], vec![0.0; self.config.num_pois]),
        };
        LstmState {
            h: vec![0.0; h],
            c: vec![0.0; h],
            features: features.to_vec(),
            gate_features,
            output_features,
        }
    }

    /// One step with every intermediate vector exposed.
    pub fn forward_step(&self, state: &mut LstmState, input: usize, attributes: &[f64]) -> Result<LstmStep> {
        check_input(input, self.config.num_pois)?;
        let x = self.embedding.row(input);
        let h_prev = std::mem::take(&mut state.h);
        let c_prev = std::mem::take(&mut state.c);
        let (gate, m) = match &self.context {
            Some(ctx) => {
                let mut pre = ctx.pb.data().to_vec();
                ctx.p.matvec_acc(attributes, &mut pre);
                let gate: Vec<f64> = pre.into_iter().map(sigmoid).collect();
                let m = h_prev.iter().zip(&gate).map(|(a, g)| a * g).collect();
                (gate, m)
            }
            None => (Vec::new(), h_prev.clone()),
        };
        let contextual = self.context.is_some();
        let finish = |mut a: Vec<f64>, peep: Option<&Matrix>| {
            if let Some(w) = peep {
                peephole(&mut a, w, &c_prev);
            }
            if contextual {
                add_into(&mut a, &state.gate_features);
            }
            a
        };
        let i: Vec<f64> = finish(self.input.pre(x, &m), Some(&self.peep_i)).into_iter().map(sigmoid).collect();
        let f: Vec<f64> = finish(self.forget.pre(x, &m), Some(&self.peep_f)).into_iter().map(sigmoid).collect();
        let z: Vec<f64> = finish(self.cell.pre(x, &m), None).into_iter().map(f64::tanh).collect();
        let c: Vec<f64> = (0..c_prev.len()).map(|k| f[k] * c_prev[k] + i[k] * z[k]).collect();
        let o: Vec<f64> = finish(self.output.pre(x, &m), Some(&self.peep_o)).into_iter().map(sigmoid).collect();
        let h: Vec<f64> = o.iter().zip(&c).map(|(o, c)| o * c.tanh()).collect();
        let mut logits = self.bias_out.data().to_vec();
        self.v.matvec_acc(&h, &mut logits);
        if contextual {
            add_into(&mut logits, &state.output_features);
        }
        state.h = h.clone();
        state.c = c.clone();
        Ok(LstmStep { gate, m, h_prev, c_prev, i, f, z, o, c, h, logits })
    }
}

fn gate_blocks<'a>(name: &str, g: &'a GateWeights, out: &mut Vec<(String, &'a Matrix)>) {
    out.push((format!("{name}.w"), &g.w));
    out.push((format!("{name}.wh"), &g.wh));
    out.push((format!("{name}.b"), &g.b));
}

fn gate_blocks_mut<'a>(name: &str, g: &'a mut GateWeights, out: &mut Vec<(String, &'a mut Matrix)>) {
    out.push((format!("{name}.w"), &mut g.w));
    out.push((format!("{name}.wh"), &mut g.wh));
    out.push((format!("{name}.b"), &mut g.b));
}

impl Parameters for Lstm {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        gate_blocks("input", &self.input, &mut out);
        gate_blocks("forget", &self.forget, &mut out);
        gate_blocks("cell", &self.cell, &mut out);
        gate_blocks("output", &self.output, &mut out);
        out.push(("peep_i".into(), &self.peep_i));
        out.push(("peep_f".into(), &self.peep_f));
        out.push(("peep_o".into(), &self.peep_o));
        out.push(("v".into(), &self.v));
        out.push(("bias_out".into(), &self.bias_out));
        if let Some(c) = &self.context {
            out.push(("p".into(), &c.p));
            out.push(("pb".into(), &c.pb));
            out.push(("w_feat".into(), &c.w_feat));
            out.push(("g".into(), &c.g));
        }
        out
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = vec![("embedding".to_string(), &mut self.embedding)];
        gate_blocks_mut("input", &mut self.input, &mut out);
        gate_blocks_mut("forget", &mut self.forget, &mut out);
        gate_blocks_mut("cell", &mut self.cell, &mut out);
        gate_blocks_mut("output", &mut self.output, &mut out);
        out.push(("peep_i".into(), &mut self.peep_i));
        out.push(("peep_f".into(), &mut self.peep_f));
        out.push(("peep_o".into(), &mut self.peep_o));
        out.push(("v".into(), &mut self.v));
        out.push(("bias_out".into(), &mut self.bias_out));
        if let Some(c) = &mut self.context {
            out.push(("p".into(), &mut c.p));
            out.push(("pb".into(), &mut c.pb));
            out.push(("w_feat".into(), &mut c.w_feat));
            out.push(("g".into(), &mut c.g));
        }
        out
    }
}

impl SequenceModel for Lstm {
    type State = LstmState;

    fn kind(&self) -> ModelKind {
        if self.config.contextual {
            ModelKind::CapsLstm
        } else {
            ModelKind::Lstm
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

    fn start(&self, features: &[f64]) -> LstmState {
        self.begin(features)
    }

    fn step_logits(&self, state: &mut LstmState, input: usize, attributes: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_step(state, input, attributes)?.logits)
    }

    fn nll_and_grad(&self, ex: &Example, grad: &mut Lstm) -> Result<f64> {
        ex.validate(self.config.num_pois)?;
        let hdim = self.config.hidden;
        let mut state = self.begin(&ex.features);
        let mut steps = Vec::with_capacity(ex.len());
        let mut probs = Vec::with_capacity(ex.len());
        let mut loss = 0.0;
        for t in 0..ex.len() {
            let s = self.forward_step(&mut state, ex.inputs[t], &ex.attributes[t])?;
            let p = softmax(&s.logits);
            loss -= p[ex.targets[t]].ln();
            probs.push(p);
            steps.push(s);
        }

        let mut dh_next = vec![0.0; hdim];
        let mut dc_next = vec![0.0; hdim];
        let mut d_gate_features = vec![0.0; hdim];
        let mut d_output_features = vec![0.0; self.config.num_pois];
        for t in (0..ex.len()).rev() {
            let s = &steps[t];
            let mut dy = probs[t].clone();
            dy[ex.targets[t]] -= 1.0;
            grad.v.add_outer(&dy, &s.h);
            add_into(grad.bias_out.data_mut(), &dy);
            add_into(&mut d_output_features, &dy);

            let mut dh = dh_next.clone();
            self.v.matvec_t_acc(&dy, &mut dh);
            let mut dai = vec![0.0; hdim];
            let mut daf = vec![0.0; hdim];
            let mut daz = vec![0.0; hdim];
            let mut dao = vec![0.0; hdim];
            let mut dc_prev = vec![0.0; hdim];
            for k in 0..hdim {
                let tc = s.c[k].tanh();
                let dc = dh[k] * s.o[k] * (1.0 - tc * tc) + dc_next[k];
                dao[k] = dh[k] * tc * s.o[k] * (1.0 - s.o[k]);
                dai[k] = dc * s.z[k] * s.i[k] * (1.0 - s.i[k]);
                daf[k] = dc * s.c_prev[k] * s.f[k] * (1.0 - s.f[k]);
                daz[k] = dc * s.i[k] * (1.0 - s.z[k] * s.z[k]);
                dc_prev[k] = dc * s.f[k]
                    + self.peep_i.data()[k] * dai[k]
                    + self.peep_f.data()[k] * daf[k]
                    + self.peep_o.data()[k] * dao[k];
                grad.peep_i.data_mut()[k] += dai[k] * s.c_prev[k];
                grad.peep_f.data_mut()[k] += daf[k] * s.c_prev[k];
                grad.peep_o.data_mut()[k] += dao[k] * s.c_prev[k];
            }
            let x = self.embedding.row(ex.inputs[t]);
            grad.input.accumulate(&dai, x, &s.m);
            grad.forget.accumulate(&daf, x, &s.m);
            grad.cell.accumulate(&daz, x, &s.m);
            grad.output.accumulate(&dao, x, &s.m);

            let mut dx = vec![0.0; self.config.embed_dim];
            let mut dm = vec![0.0; hdim];
            for (gw, da) in [(&self.input, &dai), (&self.forget, &daf), (&self.cell, &daz), (&self.output, &dao)] {
                gw.w.matvec_t_acc(da, &mut dx);
                gw.wh.matvec_t_acc(da, &mut dm);
            }
            add_into(grad.embedding.row_mut(ex.inputs[t]), &dx);

            match (&self.context, &mut grad.context) {
                (Some(_), Some(gctx)) => {
                    for da in [&dai, &daf, &daz, &dao] {
                        add_into(&mut d_gate_features, da);
                    }
                    let dpre: Vec<f64> = (0..hdim)
                        .map(|k| dm[k] * s.h_prev[k] * s.gate[k] * (1.0 - s.gate[k]))
                        .collect();
                    gctx.p.add_outer(&dpre, &ex.attributes[t]);
                    add_into(gctx.pb.data_mut(), &dpre);
                    dh_next = dm.iter().zip(&s.gate).map(|(d, g)| d * g).collect();
                }
                _ => dh_next = dm,
            }
            dc_next = dc_prev;
        }
        if let Some(gctx) = &mut grad.context {
            gctx.w_feat.add_outer(&d_gate_features, &state.features);
            gctx.g.add_outer(&d_output_features, &state.features);
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grad_check;

    fn toy(contextual: bool) -> (Lstm, Example) {
        let cfg = LstmConfig { num_pois: 6, embed_dim: 4, hidden: 5, attr_dim: 30, feat_dim: 7, contextual };
        let mut rng = seeded(5);
        let mut m = Lstm::new(cfg, &mut rng);
        for (_, b) in m.blocks_mut() {
            for v in b.data_mut() {
                *v += rng.gen_range(-0.3..0.3);
            }
        }
        (m, Example::random(6, 4, 30, 7, &mut rng))
    }

    #[test]
    fn gradients_match_finite_differences() {
        for contextual in [false, true] {
            let (m, ex) = toy(contextual);
            let mut g = m.gradient_buffer();
            m.nll_and_grad(&ex, &mut g).unwrap();
            let check = grad_check(&m, &g, |p: &Lstm| p.nll(&ex).unwrap(), 1e-5, None, 1);
            assert!(check.max_rel_error < 1e-5, "{check:?}");
        }
    }

    #[test]
    fn saturated_gates_keep_memory() {
        let cfg = LstmConfig { num_pois: 4, embed_dim: 2, hidden: 3, attr_dim: 30, feat_dim: 7, contextual: false };
        let mut m = Lstm::zeros(cfg);
        m.forget.b.fill(40.0);
        m.input.b.fill(-800.0);
        let mut s = m.start(&[0.0; 7]);
        s.c = vec![0.3, -0.2, 0.9];
        let step = m.forward_step(&mut s, 1, &[0.0; 30]).unwrap();
        assert_eq!(step.c, vec![0.3, -0.2, 0.9]);
    }
}
