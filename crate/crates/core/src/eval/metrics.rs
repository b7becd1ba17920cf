//! Sequence quality metrics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::{PoiId, PoiInfo};
use crate::error::{Error, Result};
use crate::geo::haversine_km;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Every `(a, b)` with `a` strictly before `b` in `seq`.
pub fn ordered_pairs<T: Ord + Copy>(seq: &[T]) -> BTreeSet<(T, T)> {
    let mut out = BTreeSet::new();
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            out.insert((seq[i], seq[j]));
        }
    }
    out
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 of ordered pairs. When neither sequence has a
/// pair (both single elements) the score is 1 for identical sequences and 0
/// otherwise.
pub fn pairs_f1<T: Ord + Copy>(actual: &[T], predicted: &[T]) -> PairScore {
    let a = ordered_pairs(actual);
    let p = ordered_pairs(predicted);
    if a.is_empty() && p.is_empty() {
        let v = if actual == predicted && !actual.is_empty() { 1.0 } else { 0.0 };
        return PairScore { precision: v, recall: v, f1: v };
    }
    let correct = a.intersection(&p).count();
    let precision = ratio(correct, p.len());
    let recall = ratio(correct, a.len());
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    PairScore { precision, recall, f1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diversity {
    /// Share of unordered pairs with different categories.
    pub normalized: f64,
    /// Number of unordered pairs with different categories.
    pub dissimilar_pairs: usize,
}

pub fn diversity<T: PartialEq>(categories: &[T]) -> Result<Diversity> {
    let n = categories.len();
    if n < 2 {
        return Err(Error::Invalid(format!("diversity needs at least 2 items, got {n}")));
    }
    let mut dissimilar = 0;
    for i in 0..n {
        for j in i + 1..n {
            if categories[i] != categories[j] {
                dissimilar += 1;
            }
        }
    }
    let pairs = n as f64 / 2.0 * (n - 1) as f64;
    Ok(Diversity { normalized: dissimilar as f64 / pairs, dissimilar_pairs: dissimilar })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub sum_km: f64,
    pub mean_km: f64,
}

/// Position-wise great-circle distance between two sequences, truncated to
/// the shorter one.
pub fn displacement(pois: &[PoiInfo], actual: &[PoiId], predicted: &[PoiId]) -> Displacement {
    if actual.len() != predicted.len() {
        log::warn!("displacement of sequences of length {} and {}; truncating", actual.len(), predicted.len());
    }
    let n = actual.len().min(predicted.len());
    let sum_km: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, b)| {
            let (a, b) = (&pois[a.index()], &pois[b.index()]);
            haversine_km(a.lat, a.lon, b.lat, b.lon)
        })
        .sum();
    Displacement { sum_km, mean_km: if n == 0 { 0.0 } else { sum_km / n as f64 } }
}
