use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use stance_core::features::FeatureVector;
use stance_core::svm::{hinge_objective, train_svm, LabeledVector, SvmConfig};

use super::Check;

pub fn lv(x: &[f64], y: i8) -> LabeledVector {
    LabeledVector::new(FeatureVector::new(x.to_vec(), "t").unwrap(), y).unwrap()
}

pub fn eight_points() -> Vec<LabeledVector> {
    [
        ([1.0, 2.0], 1),
        ([2.0, 1.5], 1),
        ([1.5, 0.5], 1),
        ([0.2, 0.8], 1),
        ([-1.0, -0.5], -1),
        ([-0.5, -1.5], -1),
        ([0.5, -0.8], -1),
        ([0.4, 0.6], -1),
    ]
    .iter()
    .map(|(x, y)| lv(x, *y))
    .collect()
}

/// Brute-force minimum of the objective: 0.1 lattice over a wide box, then a
/// 0.01 lattice around the best coarse point (the objective is convex).
pub fn lattice_minimum(data: &[LabeledVector]) -> f64 {
    let xs: Vec<Vec<f64>> = data.iter().map(|d| d.x.values.clone()).collect();
    let ys: Vec<i8> = data.iter().map(|d| d.y).collect();
    let f = |w1: f64, w2: f64, b: f64| hinge_objective(&[w1, w2], &b, &xs, &ys, &1.0, &1.0);
    let search = |center: [f64; 3], half: i64, step: f64| {
        let mut best = (f64::INFINITY, center);
        for i in -half..=half {
            for j in -half..=half {
                for k in -half..=half {
                    let p = [
                        center[0] + i as f64 * step,
                        center[1] + j as f64 * step,
                        center[2] + k as f64 * step,
                    ];
                    let v = f(p[0], p[1], p[2]);
                    if v < best.0 {
                        best = (v, p);
                    }
                }
            }
        }
        best
    };
    let coarse = search([0.0, 0.0, 0.0], 50, 0.1);
    search(coarse.1, 20, 0.01).0
}

/// 20 positives around +0.5 and 200 negatives around -0.5, unit variance.
pub fn overlapping_1d() -> Vec<LabeledVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pos = Normal::new(0.5, 1.0).unwrap();
    let neg = Normal::new(-0.5, 1.0).unwrap();
    let mut data: Vec<LabeledVector> = (0..20).map(|_| lv(&[pos.sample(&mut rng)], 1)).collect();
    data.extend((0..200).map(|_| lv(&[neg.sample(&mut rng)], -1)));
    data
}

/// Recall of the positive class after training with `alpha_pos / alpha_neg = ratio`.
pub fn positive_recall(ratio: f64, data: &[LabeledVector]) -> f64 {
    let config = SvmConfig {
        alpha_pos: ratio,
        alpha_neg: 1.0,
        learning_rate: 0.05,
        epochs: 500,
        ..Default::default()
    };
    let model = train_svm::<f64>(data, &config).unwrap();
    let pos: Vec<&LabeledVector> = data.iter().filter(|d| d.y > 0).collect();
    let hits = pos.iter().filter(|d| model.predict(&d.x).unwrap()).count();
    hits as f64 / pos.len() as f64
}

/// Cost-sensitive recall and lattice-optimal objective.
pub fn svm_check() -> Check {
    let mut check = Check::new("SVM cost sensitivity and optimality");
    let data = overlapping_1d();
    let (r1, r10) = (positive_recall(1.0, &data), positive_recall(10.0, &data));
    check.record(
        r10 > r1,
        format!("positive recall {r1:.2} at ratio 1, {r10:.2} at ratio 10"),
    );
    let points = eight_points();
    let config = SvmConfig {
        learning_rate: 0.2,
        epochs: 4000,
        tolerance: 1e-12,
        ..Default::default()
    };
    let trained = train_svm::<f64>(&points, &config)
        .unwrap()
        .objective(&points, &config)
        .unwrap();
    let lattice = lattice_minimum(&points);
    let gap = (trained - lattice).abs() / lattice;
    check.record(
        gap <= 0.02,
        format!(
            "objective {trained:.5} vs lattice {lattice:.5} ({:.2}%)",
            100.0 * gap
        ),
    );
    check
}
