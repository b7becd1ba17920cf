//! Feature tables against a direct transcription of the scoring formulas.

mod common;

use caps::data::{PoiId, SocialGraph, UserId};
use caps::features::{FeatureConfig, FeatureTables};
use caps::numerics::seeded;
use common::features::check_against_oracle;
use common::random_dataset;
use proptest::prelude::*;

#[test]
fn fixtures_match_literal_formulas() {
    let mut rng = seeded(2024);
    for _ in 0..200 {
        let data = random_dataset(&mut rng, 50, true);
        assert!(data.total_visits() <= 50);
        check_against_oracle(&data);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn consolidated_never_increases_with_hop_distance(seed in any::<u64>()) {
        let data = random_dataset(&mut seeded(seed), 40, true);
        let t = FeatureTables::build(&data, &FeatureConfig::default());
        let n = data.num_pois();
        for u in 0..data.num_users() {
            for i in 0..n {
                let to = PoiId(i as u32);
                let mut prevs: Vec<(f64, f64)> = (0..n)
                    .map(|p| {
                        let p = PoiId(p as u32);
                        (t.distance_km(p, to), t.consolidated(Some(UserId(u as u32)), to, 9, Some(p)))
                    })
                    .collect();
                prevs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let ps = t.preference(Some(UserId(u as u32)), to, 9);
                for w in prevs.windows(2) {
                    prop_assert!(w[1].1 <= w[0].1 + 1e-15 * ps.abs());
                }
                for (_, p) in prevs {
                    prop_assert!(p <= ps + 1e-15 * ps.abs());
                    prop_assert!(p >= 0.0 || ps < 0.0);
                }
            }
        }
    }

    #[test]
    fn no_friends_collapses_social_blend(seed in any::<u64>()) {
        let mut data = random_dataset(&mut seeded(seed), 40, true);
        data.social = SocialGraph::empty(data.num_users());
        let t = FeatureTables::build(&data, &FeatureConfig::default());
        for u in 0..data.num_users() {
            prop_assert_eq!(t.ast.psi[u], 0.0);
            for i in 0..data.num_pois() {
                let (u, i) = (UserId(u as u32), PoiId(i as u32));
                prop_assert_eq!(t.ast.user_poi(u, i), t.ast.user_poi_own(u, i));
            }
        }
    }
}
