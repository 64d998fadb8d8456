mod common;

use std::time::Instant;

use common::*;
use proptest::prelude::*;
use stance_core::corpus::StanceLabel;
use stance_core::embeddings::EmbeddingFormat;
use stance_core::pipeline::{
    cascade_label, train_pipeline, CascadeCounts, LoadedResources, PipelineModel, ResourcePaths, StageTrace,
    STAGE1_FILE,
};
use stance_core::Error;

#[test]
fn mini_corpus_cascade() {
    let started = Instant::now();
    let res = mini_resources();
    let (model, report) = train_pipeline(&mini_train(), &mini_config(25), &res).unwrap();
    eprintln!("trained in {:?}: {:?}", started.elapsed(), report.stage_sizes);
    let test = mini_test();
    let (eval, traces) = model.evaluate(&test, &res.resources).unwrap();
    eprintln!("{eval}");
    let counts = CascadeCounts::from_traces(&traces);
    assert_eq!(counts.total(), test.len());
    assert_eq!(counts.unrelated, counts.stage1_negative);
    assert_eq!(counts.neutral, counts.stage2_negative);
    assert!((0.0..=1.0).contains(&eval.macro_f1));

    let dir = tempfile::tempdir().unwrap();
    model.save(dir.path()).unwrap();
    let loaded = PipelineModel::load(dir.path()).unwrap();
    loaded.check_resources(&res).unwrap();
    let (again, _) = loaded.evaluate(&test, &res.resources).unwrap();
    assert_eq!(again, eval);
}

#[test]
fn training_twice_is_bitwise_identical() {
    determinism_check().assert();
}

#[test]
fn cascade_counts_are_conserved_on_random_inputs() {
    conservation_check(0..3, 40).assert();
}

#[test]
fn missing_disagree_class_names_stage_three() {
    let train = mini_train();
    let keep: Vec<usize> = (0..train.len())
        .filter(|&i| train.instances()[i].label != Some(StanceLabel::Disagree))
        .collect();
    let err = train_pipeline(&train.select(&keep), &mini_config(25), &mini_resources()).unwrap_err();
    assert!(matches!(err, Error::SingleClass { .. }));
    assert!(err.to_string().contains("stage 3"), "{err}");
}

#[test]
fn empty_evaluation_corpus_is_an_error() {
    let (model, res) = trained_mini();
    assert!(model.evaluate(&mini_test().select(&[]), &res.resources).is_err());
}

#[test]
fn body_without_overlap_is_unrelated() {
    let (model, res) = trained_mini();
    let (label, trace) = model
        .predict(
            "Volcano erupts near remote island village",
            "Quarterly bakery revenue improved. Pastry chefs introduced seasonal croissants.",
            &res.resources,
        )
        .unwrap();
    assert_eq!(label, StanceLabel::Unrelated);
    assert!(trace.stage1_decision < 0.0 && trace.stage2_probability.is_none());
}

#[test]
fn tampered_resource_is_detected() {
    let (model, _) = trained_mini();
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("emb.txt");
    let text = std::fs::read_to_string(fixture("mini_embeddings.txt")).unwrap();
    let (header, rest) = text.split_once('\n').unwrap();
    let (first, others) = rest.split_once('\n').unwrap();
    let mut cols: Vec<&str> = first.split(' ').collect();
    cols[1] = "0.123";
    std::fs::write(&emb, format!("{header}\n{}\n{others}", cols.join(" "))).unwrap();
    let tampered = LoadedResources::load(&ResourcePaths::bundled_lexicons(
        emb,
        EmbeddingFormat::Word2vecText,
    ))
    .unwrap();
    assert!(matches!(
        model.check_resources(&tampered),
        Err(Error::ResourceMismatch { .. })
    ));

    model.save(dir.path()).unwrap();
    let stage1 = dir.path().join(STAGE1_FILE);
    let mut bytes = std::fs::read(&stage1).unwrap();
    bytes.push(b'\n');
    std::fs::write(&stage1, bytes).unwrap();
    assert!(matches!(
        PipelineModel::load(dir.path()),
        Err(Error::ResourceMismatch { .. })
    ));
}

fn outcome() -> impl Strategy<Value = (f64, f64, f64)> {
    (-2.0f64..2.0, 0.0f64..1.0, -2.0f64..2.0)
}

proptest! {
    #[test]
    fn traces_never_skip_a_stage(outcomes in prop::collection::vec(outcome(), 0..200)) {
        let traces: Vec<StageTrace> = outcomes
            .iter()
            .map(|&(s1, p2, s3)| {
                let related = s1 >= 0.0;
                let stance = related.then_some(p2 >= 0.5);
                let disagree = (stance == Some(true)).then_some(s3 >= 0.0);
                StageTrace {
                    stage1_decision: s1,
                    stage2_probability: related.then_some(p2),
                    stage3_decision: disagree.map(|_| s3),
                    final_label: cascade_label(related, stance, disagree).unwrap(),
                }
            })
            .collect();
        let c = CascadeCounts::from_traces(&traces);
        prop_assert_eq!(c.total(), traces.len());
        prop_assert_eq!(c.unrelated, c.stage1_negative);
        prop_assert_eq!(c.neutral, c.stage2_negative);
    }

    #[test]
    fn model_predictions_conserve_counts(seed in any::<u64>(), n in 1usize..30) {
        let (model, res) = trained_mini();
        let corpus = random_corpus(seed, n);
        let refs: Vec<_> = corpus.instances().iter().collect();
        let traces = model.predict_instances(&refs, &res.resources).unwrap();
        for t in &traces {
            prop_assert_eq!(t.stage2_probability.is_some(), t.stage1_decision >= 0.0);
            prop_assert_eq!(t.stage3_decision.is_some(), t.stage2_probability.is_some_and(|p| p >= 0.5));
        }
        let c = CascadeCounts::from_traces(&traces);
        prop_assert_eq!(c.total(), n);
        prop_assert_eq!(c.unrelated, c.stage1_negative);
    }
}
