//! One line per acceptance criterion; exits non-zero if any criterion fails.
mod common;

use std::process::ExitCode;

use common::gradcheck::gradient_criterion;
use common::reference::*;
use common::svm_fixtures::svm_check;
use common::*;

enum Outcome {
    Ran(Check, Option<&'static str>),
    Skipped(&'static str, &'static str),
}

type Criterion = (usize, Box<dyn Fn() -> Outcome>);

fn criteria() -> Vec<Criterion> {
    vec![
        (1, Box::new(|| Outcome::Ran(criterion_pipeline_scores(), None))),
        (
            2,
            Box::new(|| match fnc_corpora() {
                Some((_, test)) => Outcome::Ran(
                    majority_vote_check(&test.gold_labels().unwrap(), "FNC-I test corpus"),
                    None,
                ),
                None => Outcome::Ran(
                    majority_vote_check(&labels_with_counts(TEST_COUNTS), "reference test label counts"),
                    Some("scored on the reference test label distribution; FNC_DATA_DIR not set"),
                ),
            }),
        ),
        (3, Box::new(|| Outcome::Ran(criterion_stage_scores(), None))),
        (
            4,
            Box::new(|| match fnc_corpora() {
                Some((train, test)) => Outcome::Ran(derivation_check(&train, &test, "FNC-I corpus"), None),
                None => Outcome::Skipped("dataset derivation on FNC-I", "FNC_DATA_DIR not set"),
            }),
        ),
        (5, Box::new(|| Outcome::Ran(gradient_criterion(), None))),
        (6, Box::new(|| Outcome::Ran(svm_check(), None))),
        (7, Box::new(|| Outcome::Ran(determinism_check(), None))),
        (
            8,
            Box::new(|| match desk_scale_check() {
                Some(check) => Outcome::Ran(check, None),
                None => Outcome::Skipped("desk-scale end-to-end on FNC-I", "FNC_DATA_DIR not set"),
            }),
        ),
        (9, Box::new(|| Outcome::Ran(sentiment_check(), None))),
        (10, Box::new(|| Outcome::Ran(conservation_check(0..20, 50), None))),
    ]
}

fn main() -> ExitCode {
    let mut failed = 0;
    for (n, run) in criteria() {
        let started = std::time::Instant::now();
        match run() {
            Outcome::Ran(check, note) => {
                let status = if check.passed { "PASS" } else { "FAIL" };
                let note = note.map(|n| format!(" [{n}]")).unwrap_or_default();
                println!(
                    "criterion {n:>2}: {status} {}{note} ({:.1?})",
                    check.name,
                    started.elapsed()
                );
                for d in &check.details {
                    println!("    {d}");
                }
                failed += usize::from(!check.passed);
            }
            Outcome::Skipped(name, why) => println!("criterion {n:>2}: SKIP {name} ({why})"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
