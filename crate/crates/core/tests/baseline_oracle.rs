//! Baselines against exhaustive or independently written references.

mod common;

use caps::baselines::{apriori_generate, power_iteration, AprioriConfig, Markov};
use caps::data::{PoiId, UserId};
use caps::features::{FeatureConfig, FeatureTables};
use caps::numerics::seeded;
use common::baselines::{brute_force, check_hits_regions, gram_oracle, small_instance};
use common::random_dataset;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn apriori_equals_exhaustive_enumeration(
        seed in any::<u64>(),
        length in 1usize..=6,
        k in 1usize..=5,
        eps in 0.5f64..6.0,
        budget_h in 0.2f64..8.0,
    ) {
        let (data, t) = small_instance(seed);
        prop_assume!(data.num_pois() <= 6);
        let cfg = AprioriConfig { epsilon_km: eps, budget_secs: budget_h * 3600.0, beam: None };
        let start = PoiId((seed % data.num_pois() as u64) as u32);
        let user = Some(UserId(0));
        let got = apriori_generate(&t, user, start, 1_600_030_000, length, &cfg, k);
        let want = brute_force(&t, user, start, 1_600_030_000, length, &cfg, k);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn apriori_trips_respect_hop_and_time_limits(seed in any::<u64>(), length in 2usize..=8) {
        let mut rng = seeded(seed);
        let data = random_dataset(&mut rng, 50, true);
        let t = FeatureTables::build(&data, &FeatureConfig::default());
        let cfg = AprioriConfig::default();
        let start = PoiId(rng.gen_range(0..data.num_pois()) as u32);
        for trip in apriori_generate(&t, None, start, 1_600_000_000, length, &cfg, 10) {
            let mut total = 0.0;
            for w in trip.pois.windows(2) {
                prop_assert!(data.distance_km(w[0], w[1]) <= 2.0);
                total += t.stay.seconds(w[0]) + data.travel_secs(w[0], w[1]);
            }
            prop_assert!(total <= 8.0 * 3600.0);
            prop_assert!((total - trip.trip_secs).abs() <= 1e-9 * total.max(1.0));
        }
    }

    #[test]
    fn markov_rows_are_stochastic(seed in any::<u64>(), smoothing in prop_oneof![Just(0.0), 0.0f64..3.0]) {
        let data = random_dataset(&mut seeded(seed), 50, false);
        let m = Markov::fit(&data.sessions, data.num_users(), smoothing);
        for chain in m.users.iter().chain([&m.population]) {
            for &from in &chain.alphabet {
                let row = chain.row(from);
                let sum: f64 = row.iter().map(|r| r.1).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12, "row sum {}", sum);
                prop_assert!(row.iter().all(|r| r.1 >= 0.0));
            }
            if !chain.alphabet.is_empty() {
                let sum: f64 = chain.initial_probs().iter().map(|r| r.1).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hits_matches_gram_matrix_iteration(seed in any::<u64>(), rows in 1usize..8, cols in 1usize..8) {
        let mut rng = seeded(seed);
        let adj: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| if rng.gen_bool(0.5) { rng.gen_range(1..5) as f64 } else { 0.0 }).collect())
            .collect();
        let (hub, auth, _) = power_iteration(&adj, 0.0, 100);
        let (want_hub, want_auth) = gram_oracle(&adj, 100);
        for (a, b) in auth.iter().zip(&want_auth).chain(hub.iter().zip(&want_hub)) {
            prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
        }
    }
}

#[test]
fn fitted_regions_match_oracle() {
    check_hits_regions(99, 50);
}
