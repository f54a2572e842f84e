use proptest::prelude::*;
use rsketch_core::metrics::{evaluate, mlp_flops, mlp_params, sketch_flops, sketch_params, FlopConvention, MlpSpec};
use rsketch_core::Task;

proptest! {
    #[test]
    fn accuracy_matches_a_naive_count(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..100)) {
        let preds: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let labels: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        let mut correct = 0;
        for (p, l) in &pairs {
            if p == l {
                correct += 1;
            }
        }
        let r = evaluate(&preds, &labels, Task::BinaryClassification).unwrap();
        prop_assert_eq!(r.value, correct as f64 / pairs.len() as f64);
    }

    #[test]
    fn mae_matches_a_naive_sum(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..100)) {
        let preds: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let labels: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let mut total = 0.0;
        for (p, l) in &pairs {
            total += if p > l { p - l } else { l - p };
        }
        let r = evaluate(&preds, &labels, Task::Regression).unwrap();
        prop_assert!((r.value - total / pairs.len() as f64).abs() <= 1e-9 * total.max(1.0));
    }
}

#[test]
fn accounting_by_hand() {
    // 4 -> 3 -> 2: weights 12 + 6, biases 3 + 2.
    let spec = MlpSpec::parse(4, "3", 2).unwrap();
    assert_eq!(mlp_params(&spec), 23);
    assert_eq!(mlp_flops(&spec, FlopConvention::MacIsOne), 18);
    assert_eq!(mlp_flops(&spec, FlopConvention::MacIsTwo), 36);
    assert_eq!(sketch_params(10, 4, 5, 2), 50);
    // 2*5*2 + floor(2*1*4/3) + 4
    assert_eq!(sketch_flops(5, 2, 1, 4), 26);
    assert!(MlpSpec::parse(4, "3/x", 1).is_err());
    assert!(evaluate(&[], &[], Task::Regression).is_err());
    assert!(evaluate(&[1.0], &[1.0, 0.0], Task::Regression).is_err());
}
