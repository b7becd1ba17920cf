//! Mini-batch SGD with deterministic, chunked gradient reduction.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Example, SequenceModel};
use crate::data::Session;
use crate::error::{Error, Result};
use crate::features::FeatureTables;
use crate::numerics::{sgd_step, stream, SgdConfig};

/// Longest sequence fed to a model; longer sessions are split.
pub const MAX_SEQUENCE_LEN: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub sgd: SgdConfig,
    /// Sequences per parallel work unit; fixed so sums do not depend on the
    /// number of threads.
    pub chunk_size: usize,
    pub max_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { sgd: SgdConfig::default(), chunk_size: 8, max_len: MAX_SEQUENCE_LEN }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean sequence loss of each epoch.
    pub loss_curve: Vec<f64>,
}

/// Teacher-forcing examples from every session with at least two visits.
/// Sessions longer than `max_len` are cut into windows overlapping by one
/// visit so every transition is kept.
pub fn examples_from_sessions(tables: &FeatureTables, sessions: &[Session], max_len: usize) -> Result<Vec<Example>> {
    let max_len = max_len.max(2);
    let mut out = Vec::new();
    for s in sessions.iter().filter(|s| s.is_trainable()) {
        let mut start = 0;
        while start + 1 < s.len() {
            let end = (start + max_len).min(s.len());
            let visits = &s.visits[start..end];
            let pois: Vec<usize> = visits.iter().map(|v| v.poi.index()).collect();
            let mut attributes = tables.attribute_inputs(visits)?;
            attributes.pop();
            out.push(Example {
                inputs: pois[..pois.len() - 1].to_vec(),
                targets: pois[1..].to_vec(),
                attributes,
                features: tables.feature_input(&tables.feature_vector(visits)?),
            });
            start = end - 1;
        }
    }
    Ok(out)
}

/// Loss and summed gradient of a batch, reduced chunk by chunk in order.
fn batch_gradient<M: SequenceModel>(model: &M, batch: &[&Example], chunk: usize) -> Result<(Vec<f64>, M)> {
    let parts: Vec<Result<(Vec<f64>, M)>> = batch
        .par_chunks(chunk.max(1))
        .map(|items| {
            let mut grad = model.gradient_buffer();
            let losses = items.iter().map(|ex| model.nll_and_grad(ex, &mut grad)).collect::<Result<Vec<f64>>>()?;
            Ok((losses, grad))
        })
        .collect();
    let mut losses = Vec::with_capacity(batch.len());
    let mut total: Option<M> = None;
    for part in parts {
        let (l, g) = part?;
        losses.extend(l);
        match &mut total {
            None => total = Some(g),
            Some(t) => t.accumulate(1.0, &g),
        }
    }
    Ok((losses, total.unwrap_or_else(|| model.gradient_buffer())))
}

/// Train `model` in place. Batches are drawn from a seeded shuffle each
/// epoch; gradients are averaged over the batch before clipping.
pub fn train<M: SequenceModel>(model: &mut M, examples: &[Example], cfg: &TrainConfig, seed: u64) -> Result<TrainReport> {
    cfg.sgd.validate()?;
    if examples.is_empty() {
        return Err(Error::Invalid("no training sequences".into()));
    }
    let mut rng = stream(seed, 1);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut per_example = vec![0.0; examples.len()];
    let mut loss_curve = Vec::with_capacity(cfg.sgd.epochs);
    for epoch in 0..cfg.sgd.epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(cfg.sgd.batch_size) {
            let batch: Vec<&Example> = idx.iter().map(|&i| &examples[i]).collect();
            let (losses, mut grad) = batch_gradient(model, &batch, cfg.chunk_size)?;
            for (&i, l) in idx.iter().zip(&losses) {
                if !l.is_finite() {
                    return Err(Error::Diverged { epoch });
                }
                per_example[i] = *l;
            }
            for (_, m) in grad.blocks_mut() {
                m.scale(1.0 / idx.len() as f64);
            }
            sgd_step(model, &mut grad, &cfg.sgd).map_err(|e| match e {
                Error::NonFinite(block) => {
                    log::error!("non-finite gradient in {block} at epoch {epoch}");
                    Error::Diverged { epoch }
                }
                other => other,
            })?;
        }
        let mean = per_example.iter().sum::<f64>() / examples.len() as f64;
        log::info!("epoch {epoch}: loss {mean:.5}");
        loss_curve.push(mean);
    }
    Ok(TrainReport { loss_curve })
}
