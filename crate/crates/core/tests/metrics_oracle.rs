//! Metric definitions against exhaustive enumeration and hand formulas.

mod common;

use caps::data::{CategoryId, PoiId, PoiInfo};
use caps::eval::{displacement, diversity, pairs_f1};
use caps::geo::offset_km;
use caps::numerics::seeded;
use common::metrics::pairs_oracle;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn pairs_f1_matches_enumeration_on_10k_pairs() {
    let mut rng = seeded(4);
    for _ in 0..10_000 {
        let alphabet = rng.gen_range(2..8);
        let na = rng.gen_range(2..=6);
        let np = rng.gen_range(2..=6);
        let a: Vec<u32> = (0..na).map(|_| rng.gen_range(0..alphabet)).collect();
        let p: Vec<u32> = (0..np).map(|_| rng.gen_range(0..alphabet)).collect();
        let got = pairs_f1(&a, &p);
        let (precision, recall, f1) = pairs_oracle(&a, &p);
        assert_eq!((got.precision, got.recall, got.f1), (precision, recall, f1), "{a:?} vs {p:?}");
    }
}

#[test]
fn worked_examples() {
    let s = pairs_f1(&[1, 2, 3], &[2, 1, 3]);
    assert_eq!((s.precision, s.recall), (2.0 / 3.0, 2.0 / 3.0));
    assert_eq!(pairs_f1(&[1, 2, 3], &[1, 2, 3]).f1, 1.0);
    assert_eq!(pairs_f1(&[1, 2], &[3, 4]).f1, 0.0);
    assert_eq!(diversity(&['A', 'A', 'B']).unwrap().normalized, 2.0 / 3.0);
}

fn at(lat: f64, lon: f64) -> PoiInfo {
    PoiInfo { lat, lon, category: CategoryId(0) }
}

#[test]
fn displacement_fixtures() {
    let pois = vec![at(90.0, 0.0), at(0.0, 0.0)];
    let d = displacement(&pois, &[PoiId(0)], &[PoiId(1)]);
    assert!((d.sum_km - 10007.5).abs() <= 10007.5 * 1e-3, "{}", d.sum_km);
    let quarter = std::f64::consts::FRAC_PI_2 * 6371.0;
    assert!((d.sum_km - quarter).abs() <= 1e-12 * quarter);

    // hops of 3 km and 5 km due north along a meridian
    let origin = (10.0, 20.0);
    let p3 = offset_km(origin.0, origin.1, 3.0, 0.0);
    let p5 = offset_km(origin.0, origin.1, 5.0, 0.0);
    let pois = vec![at(origin.0, origin.1), at(p3.0, p3.1), at(p5.0, p5.1)];
    let d = displacement(&pois, &[PoiId(0), PoiId(0)], &[PoiId(1), PoiId(2)]);
    assert!((d.sum_km - 8.0).abs() <= 1e-12 * 8.0, "{}", d.sum_km);
    assert!((d.mean_km - 4.0).abs() <= 1e-12 * 4.0);

    let same = displacement(&pois, &[PoiId(1), PoiId(2)], &[PoiId(1), PoiId(2)]);
    assert_eq!((same.sum_km, same.mean_km), (0.0, 0.0));
}

#[test]
fn diversity_fixtures() {
    let cases: [(&[u8], f64, usize); 4] = [
        (&[1, 1, 1, 1], 0.0, 0),
        (&[1, 2, 3, 4], 1.0, 6),
        (&[1, 1, 2], 2.0 / 3.0, 2),
        (&[1, 1, 2, 2], 4.0 / 6.0, 4),
    ];
    for (cats, want, raw) in cases {
        let d = diversity(cats).unwrap();
        assert!((d.normalized - want).abs() <= 1e-12 * want.max(1e-300), "{cats:?}");
        assert_eq!(d.dissimilar_pairs, raw);
    }
    assert!(diversity::<u8>(&[]).is_err());
    assert!(diversity(&[3u8]).is_err());
}

proptest! {
    #[test]
    fn swapping_sequences_swaps_precision_and_recall(
        a in prop::collection::vec(0u32..6, 1..7),
        p in prop::collection::vec(0u32..6, 1..7),
    ) {
        let x = pairs_f1(&a, &p);
        let y = pairs_f1(&p, &a);
        prop_assert_eq!(x.precision, y.recall);
        prop_assert_eq!(x.recall, y.precision);
        prop_assert!((0.0..=1.0).contains(&x.f1));
    }

    #[test]
    fn diversity_is_a_unit_fraction_independent_of_order(mut cats in prop::collection::vec(0u8..5, 2..12), seed in any::<u64>()) {
        let d = diversity(&cats).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.normalized));
        let mut rng = seeded(seed);
        for i in (1..cats.len()).rev() {
            cats.swap(i, rng.gen_range(0..=i));
        }
        prop_assert_eq!(diversity(&cats).unwrap(), d);
    }

    #[test]
    fn displacement_obeys_triangle_inequality(coords in prop::collection::vec((-80.0f64..80.0, -179.0f64..179.0), 9)) {
        let pois: Vec<PoiInfo> = coords.iter().map(|&(lat, lon)| at(lat, lon)).collect();
        let ids = |r: std::ops::Range<u32>| r.map(PoiId).collect::<Vec<_>>();
        let (a, b, c) = (ids(0..3), ids(3..6), ids(6..9));
        let ac = displacement(&pois, &a, &c).sum_km;
        let ab = displacement(&pois, &a, &b).sum_km;
        let bc = displacement(&pois, &b, &c).sum_km;
        prop_assert!(ac <= ab + bc + 1e-9);
    }
}
