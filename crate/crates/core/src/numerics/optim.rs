use serde::{Deserialize, Serialize};

use super::params::Parameters;
use crate::error::{Error, Result};

/// How the clip threshold is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClipMode {
    /// Rescale all gradients so their joint L2 norm is at most the threshold.
    #[default]
    GlobalNorm,
    /// Clamp every gradient entry into `[-clip, clip]`.
    PerElement,
}

/// Mini-batch SGD settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub clip: f64,
    pub clip_mode: ClipMode,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 0.002,
            clip: 5.0,
            clip_mode: ClipMode::GlobalNorm,
            batch_size: 50,
            epochs: 100,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be >= 0, got {}", self.learning_rate)));
        }
        if !(self.clip > 0.0) {
            return Err(Error::Config(format!("clip threshold must be > 0, got {}", self.clip)));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch size and epochs must be > 0".into()));
        }
        Ok(())
    }
}

pub fn global_norm<P: Parameters>(grads: &P) -> f64 {
    grads.blocks().iter().map(|(_, m)| m.norm_sq()).sum::<f64>().sqrt()
}

/// Clip `grads` in place; returns the norm measured before clipping.
pub fn clip_gradients<P: Parameters>(grads: &mut P, clip: f64, mode: ClipMode) -> f64 {
    let norm = global_norm(grads);
    match mode {
        ClipMode::GlobalNorm => {
            if norm > clip {
                let scale = clip / norm;
                for (_, m) in grads.blocks_mut() {
                    m.scale(scale);
                }
            }
        }
        ClipMode::PerElement => {
            for (_, m) in grads.blocks_mut() {
                m.data_mut().iter_mut().for_each(|g| *g = g.clamp(-clip, clip));
            }
        }
    }
    norm
}

/// Check, clip and apply one descent step. Returns the pre-clip gradient norm.
pub fn sgd_step<P: Parameters>(params: &mut P, grads: &mut P, config: &SgdConfig) -> Result<f64> {
    for (name, m) in grads.blocks() {
        if !m.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    let norm = clip_gradients(grads, config.clip, config.clip_mode);
    let lr = config.learning_rate;
    for ((_, p), (_, g)) in params.blocks_mut().into_iter().zip(grads.blocks()) {
        p.axpy(-lr, g);
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    #[derive(Clone, Debug)]
    struct Two {
        a: Matrix,
        b: Matrix,
    }

    impl Parameters for Two {
        fn blocks(&self) -> Vec<(String, &Matrix)> {
            vec![("a".into(), &self.a), ("b".into(), &self.b)]
        }
        fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
            vec![("a".into(), &mut self.a), ("b".into(), &mut self.b)]
        }
    }

    fn two(a: &[f64], b: &[f64]) -> Two {
        Two {
            a: Matrix::column(a),
            b: Matrix::column(b),
        }
    }

    #[test]
    fn norm_ten_is_halved() {
        let mut g = two(&[6.0], &[8.0]);
        let norm = clip_gradients(&mut g, 5.0, ClipMode::GlobalNorm);
        assert_eq!(norm, 10.0);
        assert_eq!(g.a.data(), &[3.0]);
        assert_eq!(g.b.data(), &[4.0]);
    }

    #[test]
    fn clipping_is_idempotent() {
        for mode in [ClipMode::GlobalNorm, ClipMode::PerElement] {
            let mut g = two(&[6.0, -30.0], &[8.0, 0.1]);
            clip_gradients(&mut g, 5.0, mode);
            let once = g.clone();
            clip_gradients(&mut g, 5.0, mode);
            assert!((g.a.data()[0] - once.a.data()[0]).abs() < 1e-15);
            assert!((g.a.data()[1] - once.a.data()[1]).abs() < 1e-15);
            assert!((g.b.data()[0] - once.b.data()[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradients_leave_params() {
        let mut p = two(&[1.5, -2.0], &[0.25]);
        let before = p.clone();
        let mut g = two(&[0.0, 0.0], &[0.0]);
        sgd_step(&mut p, &mut g, &SgdConfig::default()).unwrap();
        assert_eq!(p.a, before.a);
        assert_eq!(p.b, before.b);
    }

    #[test]
    fn scalar_update() {
        let mut p = two(&[1.0], &[]);
        let mut g = two(&[0.5], &[]);
        sgd_step(&mut p, &mut g, &SgdConfig::default()).unwrap();
        assert!((p.a.data()[0] - 0.999).abs() < 1e-15);
    }

    #[test]
    fn nan_gradient_names_block() {
        let mut p = two(&[1.0], &[1.0]);
        let mut g = two(&[0.0], &[f64::NAN]);
        match sgd_step(&mut p, &mut g, &SgdConfig::default()) {
            Err(Error::NonFinite(name)) => assert_eq!(name, "b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn defaults_match_reported_settings() {
        let c = SgdConfig::default();
        assert_eq!(c.learning_rate, 0.002);
        assert_eq!(c.clip, 5.0);
        assert_eq!(c.batch_size, 50);
        assert_eq!(c.epochs, 100);
        assert!(c.validate().is_ok());
    }
}
