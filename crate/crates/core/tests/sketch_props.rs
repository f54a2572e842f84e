use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsketch_core::codec::{sketch_from_bytes, sketch_to_bytes};
use rsketch_core::sketch::median_of_means;
use rsketch_core::{exact_weighted_kde, Estimator, LshEnsembleSpec, LshFamilyConfig, RepresenterSketch, WeightedPoint};

fn spec(dim: usize, family: u8, rows: usize, range: usize, seed: u64) -> LshEnsembleSpec {
    let family = match family % 3 {
        0 => LshFamilyConfig::l2(dim, 1.5),
        1 => LshFamilyConfig::sparse(dim, 1.5),
        _ => LshFamilyConfig::sign(dim),
    };
    LshEnsembleSpec {
        family,
        rows,
        concat: 2,
        range,
        master_seed: seed,
    }
}

fn random_points(n: usize, dim: usize, seed: u64) -> Vec<WeightedPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            WeightedPoint::new(x, rng.random_range(-1.0..1.0))
        })
        .collect()
}

fn points_strategy(dim: usize) -> impl Strategy<Value = Vec<WeightedPoint>> {
    prop::collection::vec(
        (prop::collection::vec(-3.0..3.0f64, dim), -2.0..2.0f64).prop_map(|(x, a)| WeightedPoint::new(x, a)),
        1..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_row_sums_to_total_weight(points in points_strategy(3), family in 0u8..3, seed in any::<u64>()) {
        let s = RepresenterSketch::build(&points, spec(3, family, 16, 32, seed)).unwrap();
        let total: f64 = points.iter().map(|p| p.alpha).sum();
        prop_assert!((s.total_weight() - total).abs() < 1e-9);
        for l in 0..s.rows() {
            let row: f64 = s.row(l).iter().sum();
            prop_assert!((row - total).abs() < 1e-9, "row {} sums to {} not {}", l, row, total);
        }
    }

    #[test]
    fn counters_are_linear_in_weights(points in points_strategy(2), c in -4.0..4.0f64, seed in any::<u64>()) {
        let sp = spec(2, 0, 8, 16, seed);
        let base = RepresenterSketch::build(&points, sp).unwrap();
        let scaled_points: Vec<_> = points.iter().map(|p| WeightedPoint::new(p.x.clone(), c * p.alpha)).collect();
        let scaled = RepresenterSketch::build(&scaled_points, sp).unwrap();
        for (a, b) in base.counters().iter().zip(scaled.counters()) {
            prop_assert!((c * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn merge_equals_union(a in points_strategy(2), b in points_strategy(2), family in 0u8..3, seed in any::<u64>()) {
        let sp = spec(2, family, 8, 16, seed);
        let sa = RepresenterSketch::build(&a, sp).unwrap();
        let sb = RepresenterSketch::build(&b, sp).unwrap();
        let all: Vec<_> = a.iter().chain(&b).cloned().collect();
        let union = RepresenterSketch::build(&all, sp).unwrap();
        let merged = sa.merge(&sb).unwrap();
        prop_assert_eq!(merged.count(), union.count());
        for (x, y) in merged.counters().iter().zip(union.counters()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn codec_round_trip(points in points_strategy(4), family in 0u8..3, seed in any::<u64>()) {
        let s = RepresenterSketch::build(&points, spec(4, family, 5, 7, seed)).unwrap();
        let back = sketch_from_bytes(&sketch_to_bytes(&s)).unwrap();
        prop_assert_eq!(back.spec(), s.spec());
        prop_assert_eq!(back.counters(), s.counters());
        prop_assert_eq!(back.count(), s.count());
        prop_assert_eq!(back.total_weight(), s.total_weight());
    }

    #[test]
    fn single_group_median_of_means_is_the_mean(values in prop::collection::vec(-1e3..1e3f64, 1..200)) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        prop_assert!((median_of_means(&values, 1).unwrap() - mean).abs() < 1e-9);
    }

    #[test]
    fn median_of_means_lies_within_range(values in prop::collection::vec(-1e3..1e3f64, 1..200), g in 1usize..200) {
        let g = g.min(values.len());
        let m = median_of_means(&values, g).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9);
    }
}

#[test]
fn same_seed_builds_identical_sketches() {
    let points = random_points(200, 5, 1);
    let sp = spec(5, 1, 32, 64, 99);
    let a = RepresenterSketch::build(&points, sp).unwrap();
    let b = RepresenterSketch::build(&points, sp).unwrap();
    assert_eq!(a.counters(), b.counters());
    let other = RepresenterSketch::build(&points, spec(5, 1, 32, 64, 100)).unwrap();
    assert_ne!(a.counters(), other.counters());
}

#[test]
fn batch_and_streaming_inserts_agree_exactly() {
    let points = random_points(1000, 4, 2);
    let sp = spec(4, 0, 50, 100, 3);
    let batch = RepresenterSketch::build(&points, sp).unwrap();
    let mut stream = RepresenterSketch::new(sp).unwrap();
    for p in &points {
        stream.add(p).unwrap();
    }
    assert_eq!(batch.counters(), stream.counters());
    let mut chunked = RepresenterSketch::new(sp).unwrap();
    for chunk in points.chunks(37) {
        chunked.extend(chunk).unwrap();
    }
    assert_eq!(batch.counters(), chunked.counters());
}

#[test]
fn four_shards_merge_to_the_full_sketch() {
    let points = random_points(500, 3, 4);
    let sp = spec(3, 2, 40, 64, 5);
    let full = RepresenterSketch::build(&points, sp).unwrap();
    let mut merged = RepresenterSketch::new(sp).unwrap();
    for shard in points.chunks(125) {
        merged.merge_from(&RepresenterSketch::build(shard, sp).unwrap()).unwrap();
    }
    assert_eq!(merged.count(), 500);
    for (a, b) in merged.counters().iter().zip(full.counters()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn incompatible_sketches_refuse_to_merge() {
    let a = RepresenterSketch::new(spec(3, 0, 4, 8, 1)).unwrap();
    let b = RepresenterSketch::new(spec(3, 0, 4, 8, 2)).unwrap();
    assert!(a.merge(&b).is_err());
    assert!(a.query(&[0.0; 3], Estimator::MedianOfMeans(5), false).is_err());
    assert!(a.query(&[0.0; 3], Estimator::MedianOfMeans(0), false).is_err());
}

#[test]
fn rejected_point_leaves_sketch_untouched() {
    let mut s = RepresenterSketch::new(spec(2, 0, 4, 8, 1)).unwrap();
    let good = WeightedPoint::new(vec![0.0, 1.0], 1.0);
    let bad = WeightedPoint::new(vec![0.0, f64::NAN], 1.0);
    assert!(s.extend(&[good.clone(), bad]).is_err());
    assert_eq!(s.count(), 0);
    assert!(s.counters().iter().all(|&c| c == 0.0));
    assert!(s.add(&WeightedPoint::new(vec![0.0], 1.0)).is_err());
}

#[test]
fn mean_over_independent_sketches_is_unbiased() {
    // Average the single-row estimate over many independent seeds; a large
    // range keeps the bias from index collisions negligible.
    let points = random_points(20, 3, 6);
    let q = [0.2, -0.1, 0.4];
    let trials = 4000;
    let mut est = Vec::with_capacity(trials);
    let mut kernel = None;
    for t in 0..trials {
        let sp = spec(3, 0, 1, 65_536, 1_000 + t as u64);
        kernel = Some(sp.kernel());
        let s = RepresenterSketch::build(&points, sp).unwrap();
        est.push(s.query_mean(&q).unwrap().value);
    }
    let exact = exact_weighted_kde(&q, &points, &kernel.unwrap()).unwrap();
    let n = trials as f64;
    let mean = est.iter().sum::<f64>() / n;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
}
