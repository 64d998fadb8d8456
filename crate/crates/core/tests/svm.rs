mod common;

use common::svm_fixtures::{eight_points, lattice_minimum, lv, overlapping_1d, positive_recall};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use proptest::prelude::*;
use stance_core::features::FeatureVector;
use stance_core::svm::{hinge_objective, train_svm, LabeledVector, SvmConfig, SvmModel};

fn rat(v: f64) -> BigRational {
    BigRational::from_f64(v).unwrap()
}

fn converging() -> SvmConfig {
    SvmConfig {
        learning_rate: 0.5,
        epochs: 4000,
        tolerance: 1e-12,
        ..Default::default()
    }
}

#[test]
fn objective_matches_exact_rational_sum() {
    let pts: [([f64; 2], i8); 6] = [
        ([0.3, 1.7], 1),
        ([-1.1, 0.4], -1),
        ([2.25, -0.6], 1),
        ([0.05, 0.05], -1),
        ([-0.7, -2.3], -1),
        ([1.4, 0.9], 1),
    ];
    let data: Vec<LabeledVector> = pts.iter().map(|(x, y)| lv(x, *y)).collect();
    let model = SvmModel::<f64>::from_parts(vec![0.8, -0.35], 0.15, "t");
    let config = SvmConfig {
        alpha_pos: 2.5,
        alpha_neg: 0.75,
        ..Default::default()
    };
    let got = model.objective(&data, &config).unwrap();

    let xs: Vec<Vec<BigRational>> = pts
        .iter()
        .map(|(x, _)| x.iter().map(|&v| rat(v)).collect())
        .collect();
    let ys: Vec<i8> = pts.iter().map(|(_, y)| *y).collect();
    let exact = hinge_objective(
        &[rat(0.8), rat(-0.35)],
        &rat(0.15),
        &xs,
        &ys,
        &rat(2.5),
        &rat(0.75),
    );
    let exact_f = exact.to_f64().unwrap();
    assert!((got - exact_f).abs() <= 1e-12 * exact_f.abs(), "{got} vs {exact}");

    // Hand form of one term: zero model pays alpha per point.
    let zero = hinge_objective(
        &[BigRational::zero(), BigRational::zero()],
        &BigRational::zero(),
        &xs,
        &ys,
        &rat(2.5),
        &rat(0.75),
    );
    assert_eq!(zero, BigRational::new(BigInt::from(39), BigInt::from(4)));
}

#[test]
fn trained_objective_near_lattice_minimum() {
    let data = eight_points();
    let config = SvmConfig {
        learning_rate: 0.2,
        ..converging()
    };
    let model = train_svm::<f64>(&data, &config).unwrap();
    let trained = model.objective(&data, &config).unwrap();
    let oracle = lattice_minimum(&data);
    eprintln!("trained {trained}, lattice {oracle}");
    assert!(trained <= oracle * 1.02, "trained {trained}, lattice {oracle}");
    assert!(trained >= oracle * 0.98, "trained {trained}, lattice {oracle}");
}

#[test]
fn penalty_ratio_raises_positive_recall() {
    let data = overlapping_1d();
    let recalls: Vec<f64> = [1.0, 3.0, 10.0]
        .iter()
        .map(|&r| positive_recall(r, &data))
        .collect();
    eprintln!("recall at ratios 1/3/10: {recalls:?}");
    assert!(recalls[2] > recalls[0], "{recalls:?}");
    assert!(
        recalls[0] <= recalls[1] && recalls[1] <= recalls[2],
        "{recalls:?}"
    );
}

#[test]
fn training_is_bitwise_deterministic() {
    let data = overlapping_1d();
    let a = train_svm::<f64>(&data, &SvmConfig::default()).unwrap();
    let b = train_svm::<f64>(&data, &SvmConfig::default()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let f = train_svm::<f32>(&data, &SvmConfig::default()).unwrap();
    assert_eq!(SvmModel::<f32>::from_json(&f.to_json().unwrap()).unwrap(), f);
}

fn dataset() -> impl Strategy<Value = Vec<LabeledVector>> {
    (2usize..4, 4usize..24).prop_flat_map(|(dim, n)| {
        prop::collection::vec((prop::collection::vec(-3.0f64..3.0, dim), any::<bool>()), n).prop_map(|rows| {
            let mut rows: Vec<LabeledVector> = rows
                .into_iter()
                .map(|(x, p)| lv(&x, if p { 1 } else { -1 }))
                .collect();
            rows[0].y = 1;
            rows[1].y = -1;
            rows
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_history_never_rises(data in dataset(), seed in 0u64..1000) {
        let config = SvmConfig { seed, epochs: 60, ..Default::default() };
        let model = train_svm::<f64>(&data, &config).unwrap();
        let at_zero = SvmModel::<f64>::from_parts(vec![0.0; data[0].x.len()], 0.0, "t")
            .objective(&data, &config)
            .unwrap();
        for pair in model.objective_history.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-6);
        }
        prop_assert!(model.objective(&data, &config).unwrap() <= at_zero);
    }

    #[test]
    fn decision_is_odd_without_bias(w in prop::collection::vec(-5.0f64..5.0, 3), x in prop::collection::vec(-5.0f64..5.0, 3)) {
        let model = SvmModel::<f64>::from_parts(w, 0.0, "t");
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let d = model.decision(&FeatureVector::new(x, "t").unwrap()).unwrap();
        let dn = model.decision(&FeatureVector::new(neg, "t").unwrap()).unwrap();
        prop_assert!((d + dn).abs() <= 1e-12 * (1.0 + d.abs()));
    }

    #[test]
    fn prediction_ignores_duplicated_inputs(data in dataset(), pick in 0usize..4) {
        let model = train_svm::<f64>(&data, &SvmConfig { epochs: 20, ..Default::default() }).unwrap();
        let x = &data[pick % data.len()].x;
        let batch = [x.clone(), x.clone()];
        let preds: Vec<bool> = batch.iter().map(|v| model.predict(v).unwrap()).collect();
        prop_assert_eq!(preds[0], preds[1]);
        prop_assert_eq!(preds[0], model.predict(x).unwrap());
    }
}
