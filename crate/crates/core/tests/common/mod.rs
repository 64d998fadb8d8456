#![allow(dead_code)]
pub mod exact;
pub mod gradcheck;
pub mod reference;
pub mod svm_fixtures;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stance_core::corpus::{load_corpus, Corpus, StanceLabel};
use stance_core::embeddings::EmbeddingFormat;
use stance_core::pipeline::{
    train_pipeline, CascadeCounts, LoadedResources, PipelineConfig, PipelineModel, ResourcePaths, DF_FILE,
    MANIFEST_FILE, STAGE1_FILE, STAGE2_FILE, STAGE3_FILE,
};
use stance_core::sentiment::SentimentLexicon;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/fixtures")
        .join(name)
}

pub fn mini_train() -> Corpus {
    load_corpus(
        &fixture("mini_train_stances.csv"),
        &fixture("mini_train_bodies.csv"),
    )
    .unwrap()
}

pub fn mini_test() -> Corpus {
    load_corpus(
        &fixture("mini_test_stances.csv"),
        &fixture("mini_test_bodies.csv"),
    )
    .unwrap()
}

pub fn mini_resources() -> LoadedResources {
    LoadedResources::load(&ResourcePaths::bundled_lexicons(
        fixture("mini_embeddings.txt"),
        EmbeddingFormat::Word2vecText,
    ))
    .unwrap()
}

/// Small network so the cascade trains in seconds.
pub fn mini_config(d: usize) -> PipelineConfig {
    let mut c = PipelineConfig::with_dim(d);
    c.stage2.filters = 16;
    c.stage2.hidden = 16;
    c.stage2.k = 16;
    c.stage2.p = 96;
    c.stage2.epochs = 15;
    c.stage2.batch_size = 8;
    c.stage2.learning_rate = 0.05;
    c
}

/// Share of golden sentences whose compound is within 0.05 of the reference.
pub fn sentiment_agreement() -> (usize, usize) {
    let lex = SentimentLexicon::default();
    let text = std::fs::read_to_string(fixture("sentiment_golden.tsv")).unwrap();
    let mut close = 0;
    let mut total = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let expected: f64 = cols[4].parse().unwrap();
        total += 1;
        if (lex.analyze(cols[0]).compound - expected).abs() <= 0.05 {
            close += 1;
        }
    }
    (close, total)
}

/// Compound agreement with the reference scores on the frozen sample.
pub fn sentiment_check() -> Check {
    let mut check = Check::new("sentiment fidelity on the frozen sample");
    let (close, total) = sentiment_agreement();
    check.record(
        close * 100 >= total * 95,
        format!("{close}/{total} compounds within 0.05 of the reference"),
    );
    check
}

/// Outcome of one acceptance criterion with its evidence lines.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
}

impl Check {
    pub fn new(name: &str) -> Self {
        Check {
            name: name.to_string(),
            passed: true,
            details: Vec::new(),
        }
    }

    pub fn record(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    pub fn assert(&self) {
        assert!(self.passed, "{}:\n{}", self.name, self.details.join("\n"));
    }
}

/// FNC-I files when `FNC_DATA_DIR` names a directory holding them.
pub fn fnc_corpora() -> Option<(Corpus, Corpus)> {
    let dir = PathBuf::from(std::env::var_os("FNC_DATA_DIR")?);
    let load = |s: &str, b: &str| load_corpus(&dir.join(s), &dir.join(b)).expect("FNC-I files load");
    Some((
        load("train_stances.csv", "train_bodies.csv"),
        load("competition_test_stances.csv", "competition_test_bodies.csv"),
    ))
}

/// Two trainings with one config give identical bytes and reports.
pub fn determinism_check() -> Check {
    let mut check = Check::new("determinism of the mini-corpus cascade");
    let started = std::time::Instant::now();
    let res = mini_resources();
    let (train, test) = (mini_train(), mini_test());
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for dir in &dirs {
        let (model, _) = train_pipeline(&train, &mini_config(25), &res).unwrap();
        model.save(dir.path()).unwrap();
        reports.push(model.evaluate(&test, &res.resources).unwrap().0);
    }
    for name in [STAGE1_FILE, STAGE2_FILE, STAGE3_FILE, DF_FILE, MANIFEST_FILE] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        check.record(a == b, format!("{name} identical ({} bytes)", a.len()));
    }
    check.record(
        reports[0] == reports[1],
        format!("reports identical, macro-F1 {:.4}", reports[0].macro_f1),
    );
    let elapsed = started.elapsed();
    check.record(elapsed.as_secs() < 300, format!("two trainings in {elapsed:.1?}"));
    check
}

/// Mini-corpus model shared by tests that only predict.
pub fn trained_mini() -> &'static (PipelineModel, LoadedResources) {
    static MODEL: OnceLock<(PipelineModel, LoadedResources)> = OnceLock::new();
    MODEL.get_or_init(|| {
        let res = mini_resources();
        let (model, _) = train_pipeline(&mini_train(), &mini_config(25), &res).unwrap();
        (model, res)
    })
}

/// Random claim and body pairs built from the mini-corpus vocabulary.
pub fn random_corpus(seed: u64, n: usize) -> Corpus {
    let train = mini_train();
    let vocab: Vec<String> = train
        .bodies()
        .values()
        .flat_map(|b| b.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = |k: usize| {
        (0..k)
            .map(|_| vocab.choose(&mut rng).unwrap().as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let bodies: BTreeMap<String, String> = (0..n).map(|i| (i.to_string(), words(40))).collect();
    let rows: Vec<_> = (0..n).map(|i| (words(8), i.to_string(), None)).collect();
    Corpus::from_parts(rows, bodies).unwrap()
}

/// Final counts sum to the corpus size and Unrelated equals stage-1 halts.
pub fn conservation_check(seeds: std::ops::Range<u64>, n: usize) -> Check {
    let mut check = Check::new("cascade conservation on random prediction sets");
    let (model, res) = trained_mini();
    for seed in seeds {
        let corpus = random_corpus(seed, n);
        let refs: Vec<_> = corpus.instances().iter().collect();
        let traces = model.predict_instances(&refs, &res.resources).unwrap();
        let c = CascadeCounts::from_traces(&traces);
        let ok =
            c.total() == corpus.len() && c.unrelated == c.stage1_negative && c.neutral == c.stage2_negative;
        check.record(ok, format!("seed {seed}: {c:?}"));
    }
    check
}

/// Stratified 10% FNC-I subsample, bundled embeddings unless `FNC_EMBEDDINGS` is set.
pub fn desk_scale_check() -> Option<Check> {
    let (train, test) = fnc_corpora()?;
    let mut check = Check::new("desk-scale end-to-end on FNC-I");
    let started = std::time::Instant::now();
    let embeddings = std::env::var_os("FNC_EMBEDDINGS").map(PathBuf::from);
    let format = match &embeddings {
        Some(p) if p.extension().is_some_and(|e| e == "bin") => EmbeddingFormat::Word2vecBinary,
        _ => EmbeddingFormat::Word2vecText,
    };
    let res = LoadedResources::load(&ResourcePaths::bundled_lexicons(
        embeddings.unwrap_or_else(|| fixture("mini_embeddings.txt")),
        format,
    ))
    .unwrap();
    let sample = train.stratified_sample(0.1, 7).unwrap();
    let config = PipelineConfig::with_dim(res.resources.embeddings.dim());
    let (model, _) = train_pipeline(&sample, &config, &res).unwrap();
    let (report, _) = model.evaluate(&test, &res.resources).unwrap();
    let elapsed = started.elapsed();
    check.record(elapsed.as_secs() < 1800, format!("finished in {elapsed:.1?}"));
    check.record(
        report.macro_f1 >= 0.45,
        format!("macro-F1 {:.4}", report.macro_f1),
    );
    let disagree = report.class(StanceLabel::Disagree).f1;
    check.record(disagree > 0.0, format!("Disagree F1 {disagree:.4}"));
    Some(check)
}
