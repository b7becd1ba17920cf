use rand::seq::index::sample;

use super::params::Parameters;
use super::rng::seeded;

#[derive(Clone, Debug)]
pub struct BlockCheck {
    pub name: String,
    pub coords_checked: usize,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub blocks: Vec<BlockCheck>,
}

/// Compare `analytic` against central differences of `loss` around `params`.
///
/// Relative error per coordinate is `|a - n| / max(|a|, |n|, 1e-8)`. When
/// `max_coords_per_block` is set, larger blocks are subsampled with `seed`.
pub fn grad_check<P, F>(
    params: &P,
    analytic: &P,
    loss: F,
    eps: f64,
    max_coords_per_block: Option<usize>,
    seed: u64,
) -> GradCheck
where
    P: Parameters + Clone,
    F: Fn(&P) -> f64,
{
    assert!((1e-7..=1e-3).contains(&eps), "eps {eps} outside [1e-7, 1e-3]");
    let mut rng = seeded(seed);
    let mut work = params.clone();
    let analytic_blocks = analytic.blocks();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        blocks: Vec::new(),
    };
    for (bi, (name, grad)) in analytic_blocks.iter().enumerate() {
        let n = grad.len();
        let coords: Vec<usize> = match max_coords_per_block {
            Some(k) if k < n => {
                let mut c = sample(&mut rng, n, k).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..n).collect(),
        };
        let mut worst = 0.0f64;
        for &ci in &coords {
            let orig = work.blocks()[bi].1.data()[ci];
            work.blocks_mut()[bi].1.data_mut()[ci] = orig + eps;
            let plus = loss(&work);
            work.blocks_mut()[bi].1.data_mut()[ci] = orig - eps;
            let minus = loss(&work);
            work.blocks_mut()[bi].1.data_mut()[ci] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let a = grad.data()[ci];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        report.max_rel_error = report.max_rel_error.max(worst);
        report.blocks.push(BlockCheck {
            name: name.clone(),
            coords_checked: coords.len(),
            max_rel_error: worst,
        });
    }
    report
}
