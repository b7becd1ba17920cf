//! Pair-F1 by scanning every index pair.

/// Ordered pairs by scanning all index pairs, deduplicated by sorting.
pub fn pair_list(seq: &[u32]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in 0..seq.len() {
        for j in 0..seq.len() {
            if i < j {
                out.push((seq[i], seq[j]));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn pairs_oracle(actual: &[u32], predicted: &[u32]) -> (f64, f64, f64) {
    let a = pair_list(actual);
    let p = pair_list(predicted);
    let correct = p.iter().filter(|x| a.contains(x)).count();
    let precision = if p.is_empty() { 0.0 } else { correct as f64 / p.len() as f64 };
    let recall = if a.is_empty() { 0.0 } else { correct as f64 / a.len() as f64 };
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    (precision, recall, f1)
}
