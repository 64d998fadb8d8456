//! Reference counts and the criterion checks built on them.
use std::collections::BTreeMap;

use stance_core::corpus::{derive_stage_dataset, Corpus, Stage, StanceLabel};
use stance_core::metrics::{ConfusionMatrix, EvalReport};

use super::exact;
use super::Check;

/// Cascade confusion matrix, rows gold, order Agree, Disagree, Neutral, Unrelated.
pub const PIPELINE: [[u64; 4]; 4] = [
    [1006, 278, 495, 124],
    [237, 160, 171, 129],
    [555, 252, 3381, 276],
    [127, 31, 523, 17668],
];
/// Per-stage matrices on gold-filtered inputs, order (negative, positive).
pub const STAGE1: [[u64; 2]; 2] = [[17668, 681], [529, 6535]];
pub const STAGE2: [[u64; 2]; 2] = [[3575, 889], [760, 1840]];
pub const STAGE3: [[u64; 2]; 2] = [[1436, 467], [387, 310]];
/// Unrelated, Neutral, Agree, Disagree.
pub const TRAIN_COUNTS: [usize; 4] = [36545, 8909, 3678, 840];
pub const TEST_COUNTS: [usize; 4] = [18349, 4464, 1903, 697];
pub const COUNT_ORDER: [StanceLabel; 4] = [
    StanceLabel::Unrelated,
    StanceLabel::Neutral,
    StanceLabel::Agree,
    StanceLabel::Disagree,
];

const TOL: f64 = 0.005;

pub fn rows<const N: usize>(m: &[[u64; N]; N]) -> Vec<Vec<u64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

fn near(check: &mut Check, what: &str, got: f64, oracle: f64, reference: f64) {
    let ok = (got - oracle).abs() <= 1e-12 && (got - reference).abs() <= TOL;
    check.record(
        ok,
        format!("{what} {got:.4} (exact {oracle:.4}, reference {reference:.2})"),
    );
}

pub fn pipeline_report() -> EvalReport {
    let m = ConfusionMatrix::from_counts(&stance_names(), rows(&PIPELINE)).unwrap();
    EvalReport::from_matrix(m, Vec::new()).unwrap()
}

fn stance_names() -> [&'static str; 4] {
    ["Agree", "Disagree", "Neutral", "Unrelated"]
}

/// Reference pipeline matrix reproduces the headline scores.
pub fn criterion_pipeline_scores() -> Check {
    let mut check = Check::new("metrics reproduce reference pipeline scores");
    let report = pipeline_report();
    let counts = rows(&PIPELINE);
    for (i, (label, reference)) in [
        (StanceLabel::Agree, 0.53),
        (StanceLabel::Disagree, 0.23),
        (StanceLabel::Neutral, 0.75),
        (StanceLabel::Unrelated, 0.97),
    ]
    .into_iter()
    .enumerate()
    {
        near(
            &mut check,
            &format!("F1 {label}"),
            report.class(label).f1,
            exact::prf(&counts, i).2,
            reference,
        );
    }
    near(
        &mut check,
        "macro-F1",
        report.macro_f1,
        exact::macro_f1(&counts, &[0, 1, 2, 3]),
        0.62,
    );
    near(
        &mut check,
        "agree/disagree macro-F1",
        report.macro_f1_agr_dis,
        exact::macro_f1(&counts, &[0, 1]),
        0.38,
    );
    near(
        &mut check,
        "FNC",
        report.fnc_relative_score,
        exact::fnc(&counts),
        0.81,
    );
    check
}

/// Stage name, class names, matrix and reference `(metric, value)` pairs.
type StageCase<'a> = (
    &'a str,
    (&'a str, &'a str),
    &'a [[u64; 2]; 2],
    &'a [(&'a str, f64)],
);

/// Reference stage matrices reproduce the per-stage precision and recall.
pub fn criterion_stage_scores() -> Check {
    let mut check = Check::new("metrics reproduce reference per-stage scores");
    let cases: [StageCase; 3] = [
        (
            "stage 1 Related",
            ("Unrelated", "Related"),
            &STAGE1,
            &[("P", 0.91), ("R", 0.93)],
        ),
        (
            "stage 2 Stance",
            ("Neutral", "Stance"),
            &STAGE2,
            &[("P", 0.67), ("R", 0.71)],
        ),
        (
            "stage 3 Disagree",
            ("Agree", "Disagree"),
            &STAGE3,
            &[("P", 0.40), ("R", 0.44), ("F1", 0.42)],
        ),
    ];
    for (name, classes, m, reference) in cases {
        let matrix = ConfusionMatrix::from_counts(&[classes.0, classes.1], rows(m)).unwrap();
        let got = matrix.prf(1).unwrap();
        let (p, r, f) = exact::prf(&rows(m), 1);
        for &(what, value) in reference {
            let (g, o) = match what {
                "P" => (got.precision, p),
                "R" => (got.recall, r),
                _ => (got.f1, f),
            };
            near(&mut check, &format!("{name} {what}"), g, o, value);
        }
    }
    check
}

/// Gold labels in `COUNT_ORDER` multiplicities.
pub fn labels_with_counts(counts: [usize; 4]) -> Vec<StanceLabel> {
    COUNT_ORDER
        .iter()
        .zip(counts)
        .flat_map(|(&l, n)| std::iter::repeat_n(l, n))
        .collect()
}

/// Always-Unrelated predictions scored against the given gold labels.
pub fn majority_vote_check(golds: &[StanceLabel], source: &str) -> Check {
    let mut check = Check::new(&format!("majority-vote baseline ({source})"));
    let preds = vec![StanceLabel::Unrelated; golds.len()];
    let report = EvalReport::from_labels(golds, &preds).unwrap();
    let n_unrel = golds.iter().filter(|&&g| g == StanceLabel::Unrelated).count() as u64;
    let n = golds.len() as u64;
    let mut counts = vec![vec![0u64; 4]; 4];
    for (i, l) in [StanceLabel::Agree, StanceLabel::Disagree, StanceLabel::Neutral]
        .iter()
        .enumerate()
    {
        counts[i][3] = golds.iter().filter(|g| *g == l).count() as u64;
    }
    counts[3][3] = n_unrel;
    assert_eq!(counts.iter().flatten().sum::<u64>(), n);
    near(
        &mut check,
        "FNC",
        report.fnc_relative_score,
        exact::fnc(&counts),
        0.39,
    );
    near(
        &mut check,
        "F1 Unrelated",
        report.class(StanceLabel::Unrelated).f1,
        exact::prf(&counts, 3).2,
        0.84,
    );
    near(
        &mut check,
        "macro-F1",
        report.macro_f1,
        exact::macro_f1(&counts, &[0, 1, 2, 3]),
        0.21,
    );
    check
}

/// Corpus with the given label counts and placeholder text.
pub fn synthetic_corpus(counts: [usize; 4]) -> Corpus {
    let labels = labels_with_counts(counts);
    let bodies: BTreeMap<String, String> = (0..1000)
        .map(|b| (format!("b{b}"), format!("body {b}")))
        .collect();
    let rows = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| (format!("claim {i}"), format!("b{}", i % 1000), Some(l)));
    Corpus::from_parts(rows, bodies).unwrap()
}

/// Stage datasets of a corpus match the reference class distributions.
pub fn derivation_check(train: &Corpus, test: &Corpus, source: &str) -> Check {
    let mut check = Check::new(&format!("stage dataset derivation ({source})"));
    let table1 = |c: &Corpus, expected: [usize; 4], split: &str, check: &mut Check| {
        let counts = c.label_counts();
        let got: Vec<usize> = COUNT_ORDER.iter().map(|&l| counts.get(l)).collect();
        check.record(got == expected, format!("{split} label counts {got:?}"));
    };
    table1(train, TRAIN_COUNTS, "train", &mut check);
    table1(test, TEST_COUNTS, "test", &mut check);
    let expected = [
        ("train", Stage::Relevance, (36545, 13427)),
        ("train", Stage::NeutralStance, (8909, 4518)),
        ("train", Stage::AgreeDisagree, (3678, 840)),
        ("test", Stage::Relevance, (18349, 7064)),
        ("test", Stage::NeutralStance, (4464, 2600)),
        ("test", Stage::AgreeDisagree, (1903, 697)),
    ];
    for (split, stage, (neg, pos)) in expected {
        let corpus = if split == "train" { train } else { test };
        let ds = derive_stage_dataset(corpus, stage).unwrap();
        let got = (ds.negatives.len(), ds.positives.len());
        check.record(got == (neg, pos), format!("{split} {stage} {got:?}"));
    }
    check
}
