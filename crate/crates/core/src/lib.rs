//! Context-aware POI sequence modeling.
//!
//! The crate turns LBSN check-in logs into sessions, derives personalised
//! preference statistics, trains contextual recurrent models (RNN and LSTM
//! with per-step attribute gating and sequence-level feature injection),
//! generates POI sequences, and evaluates them against popularity, Markov,
//! Apriori and HITS baselines.

pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod generate;
pub mod geo;
pub mod model;
pub mod numerics;
pub mod recommend;

pub use error::{Error, Result};
