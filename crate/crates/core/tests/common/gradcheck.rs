use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stance_core::cnn::{cnn_loss, CnnConfig, CnnModel, EmbeddedPair, ForwardTrace, TENSOR_NAMES};

pub fn random_input(c: &CnnConfig, rng: &mut ChaCha8Rng) -> EmbeddedPair<f64> {
    let mut v = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let claim = v(c.k * c.d);
    let doc = v(c.p * c.d);
    let s = v(8);
    EmbeddedPair {
        claim,
        doc,
        claim_sentiment: [s[0], s[1], s[2], s[3]],
        doc_sentiment: [s[4], s[5], s[6], s[7]],
    }
}

/// Glorot weights with random biases, so no ReLU sits exactly at zero.
pub fn random_model(c: &CnnConfig, seed: u64) -> CnnModel<f64> {
    let mut model = CnnModel::<f64>::new(CnnConfig { seed, ..c.clone() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p = &mut model.params;
    for t in [
        &mut p.claim_filter_bias,
        &mut p.doc_filter_bias,
        &mut p.claim_dense_bias,
        &mut p.doc_dense_bias,
        &mut p.output_bias,
    ] {
        for v in &mut t.data {
            *v = rng.gen_range(-0.3..0.3);
        }
    }
    model
}

pub fn check_config() -> CnnConfig {
    CnnConfig {
        d: 3,
        eta: 2,
        filters: 24,
        k: 4,
        p: 6,
        hidden: 24,
        l2_lambda: 0.01,
        ..CnnConfig::with_dim(3)
    }
}

/// ReLU signs and pooling positions; a coordinate whose perturbation
/// changes them straddles a kink and has no derivative there.
pub fn pattern(t: &ForwardTrace<f64>) -> Vec<usize> {
    let signs = |v: &[f64]| v.iter().map(|x| (*x > 0.0) as usize).collect::<Vec<_>>();
    [&t.claim, &t.doc]
        .iter()
        .flat_map(|b| {
            let mut p = b.argmax.clone();
            p.extend(signs(&b.conv_pre));
            p.extend(signs(&b.dense_pre));
            p
        })
        .collect()
}

/// Worst relative error between analytic and central-difference gradients
/// over 20 random differentiable coordinates of every tensor (all of them
/// for tensors with fewer entries).
pub fn gradient_check(seed: u64) -> f64 {
    let c = check_config();
    let model = random_model(&c, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    let input = random_input(&c, &mut rng);
    let target = (seed % 2) as usize;
    let grads = model
        .backward(&model.forward(input.clone()).unwrap(), target)
        .unwrap();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for (t, name) in TENSOR_NAMES.iter().enumerate() {
        let len = model.params.tensors()[t].len();
        let mut candidates: Vec<usize> = (0..len).collect();
        candidates.shuffle(&mut rng);
        let mut checked = 0;
        for i in candidates {
            if checked == 20 {
                break;
            }
            let shifted = |delta: f64| {
                let mut m = model.clone();
                m.params.tensors_mut()[t].data[i] += delta;
                m
            };
            let (up, down) = (shifted(h), shifted(-h));
            let (tu, td) = (
                up.forward(input.clone()).unwrap(),
                down.forward(input.clone()).unwrap(),
            );
            if pattern(&tu) != pattern(&td) {
                continue;
            }
            let loss = |m: &CnnModel<f64>, tr: &ForwardTrace<f64>| {
                cnn_loss(tr.probabilities, target).unwrap() + m.regularizer()
            };
            let numeric = (loss(&up, &tu) - loss(&down, &td)) / (2.0 * h);
            let analytic = grads.tensors()[t].data[i];
            let scale = numeric.abs().max(analytic.abs());
            let err = if scale < 1e-7 {
                (numeric - analytic).abs()
            } else {
                (numeric - analytic).abs() / scale
            };
            assert!(err.is_finite(), "{name}[{i}]");
            worst = worst.max(err);
            checked += 1;
        }
        assert_eq!(checked, len.min(20), "{name}: too few smooth coordinates");
    }
    worst
}

/// Central differences at three seeds within the time budget.
pub fn gradient_criterion() -> super::Check {
    let mut check = super::Check::new("CNN gradients match central differences");
    let started = std::time::Instant::now();
    for seed in [1, 2, 3] {
        let worst = gradient_check(seed);
        check.record(
            worst <= 1e-4,
            format!("seed {seed}: worst relative error {worst:.2e}"),
        );
    }
    let elapsed = started.elapsed();
    check.record(elapsed.as_secs() < 10, format!("runtime {elapsed:.1?}"));
    check
}
