//! Three-stage cascade: relevance SVM, neutral/stance CNN, agree/disagree SVM.
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cnn::{encode_pair, train_cnn, CnnConfig, CnnData, CnnModel, EncodedPair, TrainLog, STANCE};
use crate::corpus::{
    derive_stage_dataset, stratified_split, BinaryDataset, Corpus, Instance, Stage, StanceLabel,
};
use crate::embeddings::{EmbeddingFormat, EmbeddingTable};
use crate::error::{Error, Result};
use crate::features::{
    stage1_batch, stage1_features, stage3_batch, stage3_features, CategoryLexicon, FeatureSchema,
    FeatureVector, RefutingWords, Resources, STAGE1_SCHEMA_ID,
};
use crate::metrics::{ConfusionMatrix, EvalReport, StageReport};
use crate::sentiment::SentimentLexicon;
use crate::svm::{fit_svm, SvmConfig, SvmModel};
use crate::textproc::{DocumentFrequency, KeywordExtractor, KeywordProviderConfig, Stopwords};
use crate::tuning::{cross_validate, CvReport};

pub const STAGE1_FILE: &str = "stage1.model";
pub const STAGE2_FILE: &str = "stage2.model";
pub const STAGE3_FILE: &str = "stage3.model";
pub const DF_FILE: &str = "document_frequency.tsv";
pub const MANIFEST_FILE: &str = "manifest";
const MANIFEST_VERSION: &str = "1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}

/// Resource files; `None` selects the bundled default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePaths {
    pub embeddings: PathBuf,
    pub embedding_format: EmbeddingFormat,
    pub sentiment_lexicon: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub refuting_words: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
}

impl ResourcePaths {
    pub fn bundled_lexicons(embeddings: PathBuf, embedding_format: EmbeddingFormat) -> Self {
        ResourcePaths {
            embeddings,
            embedding_format,
            sentiment_lexicon: None,
            boosters: None,
            negators: None,
            categories: None,
            refuting_words: None,
            stopwords: None,
        }
    }
}

/// Loaded resources together with the content hash of each one.
#[derive(Debug, Clone)]
pub struct LoadedResources {
    pub resources: Resources,
    pub hashes: BTreeMap<String, String>,
}

fn read_optional(path: &Option<PathBuf>, bundled: &'static str) -> Result<(String, String)> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => bundled.to_string(),
    };
    let hash = sha256_hex(text.as_bytes());
    Ok((text, hash))
}

impl LoadedResources {
    pub fn load(paths: &ResourcePaths) -> Result<Self> {
        let mut hashes = BTreeMap::new();
        hashes.insert("embeddings".to_string(), sha256_file(&paths.embeddings)?);
        let embeddings = EmbeddingTable::load(&paths.embeddings, paths.embedding_format)?;
        let (lex, h) = read_optional(
            &paths.sentiment_lexicon,
            include_str!("../data/sentiment_lexicon.tsv"),
        )?;
        hashes.insert("sentiment_lexicon".into(), h);
        let (boost, h) = read_optional(&paths.boosters, include_str!("../data/boosters.tsv"))?;
        hashes.insert("boosters".into(), h);
        let (neg, h) = read_optional(&paths.negators, include_str!("../data/negators.txt"))?;
        hashes.insert("negators".into(), h);
        let (cat, h) = read_optional(&paths.categories, include_str!("../data/categories.txt"))?;
        hashes.insert("categories".into(), h);
        let (refute, h) = read_optional(&paths.refuting_words, include_str!("../data/refuting_words.txt"))?;
        hashes.insert("refuting_words".into(), h);
        let (stop, h) = read_optional(&paths.stopwords, include_str!("../data/stopwords.txt"))?;
        hashes.insert("stopwords".into(), h);
        Ok(LoadedResources {
            resources: Resources {
                embeddings,
                sentiment: SentimentLexicon::parse(&lex, &boost, &neg)?,
                categories: CategoryLexicon::parse(&cat)?,
                refuting: RefutingWords::parse(&refute)?,
                stopwords: Stopwords::parse(&stop),
            },
            hashes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stage1: SvmConfig,
    /// Replace the stage-1 penalties with inverse class frequencies.
    pub stage1_balanced: bool,
    pub stage2: CnnConfig,
    pub stage3: SvmConfig,
    pub stage3_balanced: bool,
    /// Share of stage-2 data held out for epoch selection; 0 disables it.
    pub validation_fraction: f64,
    pub split_seed: u64,
    pub keywords: KeywordProviderConfig,
}

impl PipelineConfig {
    pub fn with_dim(d: usize) -> Self {
        PipelineConfig {
            stage1: SvmConfig::default(),
            stage1_balanced: true,
            stage2: CnnConfig::with_dim(d),
            stage3: SvmConfig::default(),
            stage3_balanced: true,
            validation_fraction: 0.1,
            split_seed: 0,
            keywords: KeywordProviderConfig::default(),
        }
    }
}

/// Sizes and training curves of one pipeline fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// `(negatives, positives)` per stage.
    pub stage_sizes: [(usize, usize); 3],
    pub stage1_objective: Vec<f64>,
    pub stage2_log: TrainLog,
    pub stage3_objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineModel {
    pub stage1: SvmModel<f64>,
    pub stage2: CnnModel<f64>,
    pub stage3: SvmModel<f64>,
    pub document_frequency: DocumentFrequency,
    pub keywords: KeywordProviderConfig,
    /// Resource hashes and schema ids the models were trained against.
    pub manifest: BTreeMap<String, String>,
}

/// Per-instance record of how far the cascade went.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage1_decision: f64,
    /// Stance probability; absent when stage 1 halted.
    pub stage2_probability: Option<f64>,
    pub stage3_decision: Option<f64>,
    pub final_label: StanceLabel,
}

/// Final label from the three binary outcomes; later outcomes are ignored
/// once a stage halts.
pub fn cascade_label(related: bool, stance: Option<bool>, disagree: Option<bool>) -> Option<StanceLabel> {
    if !related {
        return Some(StanceLabel::Unrelated);
    }
    if !stance? {
        return Some(StanceLabel::Neutral);
    }
    Some(if disagree? {
        StanceLabel::Disagree
    } else {
        StanceLabel::Agree
    })
}

/// Final-label counts with the stage outcomes that produced them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeCounts {
    pub stage1_negative: usize,
    pub stage2_negative: usize,
    pub unrelated: usize,
    pub neutral: usize,
    pub agree: usize,
    pub disagree: usize,
}

impl CascadeCounts {
    pub fn from_traces(traces: &[StageTrace]) -> Self {
        let mut c = CascadeCounts::default();
        for t in traces {
            if t.stage1_decision < 0.0 {
                c.stage1_negative += 1;
            } else if t.stage2_probability.is_some_and(|p| p < 0.5) {
                c.stage2_negative += 1;
            }
            match t.final_label {
                StanceLabel::Unrelated => c.unrelated += 1,
                StanceLabel::Neutral => c.neutral += 1,
                StanceLabel::Agree => c.agree += 1,
                StanceLabel::Disagree => c.disagree += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.unrelated + self.neutral + self.agree + self.disagree
    }
}

fn stage_dataset(corpus: &Corpus, stage: Stage) -> Result<BinaryDataset> {
    let ds = derive_stage_dataset(corpus, stage)?;
    ds.require_both_classes()?;
    Ok(ds)
}

fn dataset_parts(ds: &BinaryDataset) -> (Vec<&Instance>, Vec<bool>) {
    ds.labeled().unzip()
}

fn balanced(config: &SvmConfig, on: bool, targets: &[bool]) -> SvmConfig {
    if !on {
        return config.clone();
    }
    let pos = targets.iter().filter(|&&t| t).count();
    config.with_balanced_alphas(pos, targets.len() - pos)
}

fn encode_all(
    instances: &[&Instance],
    resources: &Resources,
    config: &CnnConfig,
) -> Result<Vec<EncodedPair>> {
    instances
        .par_iter()
        .map(|i| {
            encode_pair(
                &resources.embeddings,
                &resources.sentiment,
                &i.claim,
                &i.body,
                config,
            )
        })
        .collect()
}

/// Document frequencies over the distinct claims and bodies of a corpus.
pub fn corpus_document_frequency(corpus: &Corpus, stopwords: &Stopwords) -> DocumentFrequency {
    let mut claims: Vec<&str> = corpus.instances().iter().map(|i| i.claim.as_str()).collect();
    claims.sort_unstable();
    claims.dedup();
    let docs = claims.into_iter().chain(corpus.bodies().values().map(|b| &**b));
    DocumentFrequency::build(docs, stopwords)
}

/// Trains every stage on gold-filtered data from `corpus`.
pub fn train_pipeline(
    corpus: &Corpus,
    config: &PipelineConfig,
    loaded: &LoadedResources,
) -> Result<(PipelineModel, TrainingReport)> {
    let resources = &loaded.resources;
    let datasets = [
        stage_dataset(corpus, Stage::Relevance)?,
        stage_dataset(corpus, Stage::NeutralStance)?,
        stage_dataset(corpus, Stage::AgreeDisagree)?,
    ];
    let stage_sizes = [0, 1, 2].map(|s| (datasets[s].negatives.len(), datasets[s].positives.len()));
    for (ds, (n, p)) in datasets.iter().zip(stage_sizes) {
        log::info!(
            "{}: {n} {} / {p} {}",
            ds.stage,
            ds.negative_class_name,
            ds.positive_class_name
        );
    }

    let df = corpus_document_frequency(corpus, &resources.stopwords);
    let keywords = KeywordExtractor::new(
        config.keywords.clone(),
        Some(df.clone()),
        resources.stopwords.clone(),
    )?;

    let (inst1, t1) = dataset_parts(&datasets[0]);
    let x1 = stage1_batch(&inst1, resources, &keywords)?;
    let stage1 = fit_svm::<f64>(&x1, &t1, &balanced(&config.stage1, config.stage1_balanced, &t1))?;
    log::info!(
        "stage 1 trained, final objective {:?}",
        stage1.objective_history.last()
    );

    let mut cnn_config = config.stage2.clone();
    cnn_config.d = resources.embeddings.dim();
    let (train2, valid2) = if config.validation_fraction > 0.0 {
        let (t, v) = stratified_split(&datasets[1], config.validation_fraction, config.split_seed)?;
        (t, Some(v))
    } else {
        (datasets[1].clone(), None)
    };
    let (inst2, t2) = dataset_parts(&train2);
    let pairs2 = encode_all(&inst2, resources, &cnn_config)?;
    let valid = match &valid2 {
        Some(v) => {
            let (inst, t) = dataset_parts(v);
            Some((encode_all(&inst, resources, &cnn_config)?, t))
        }
        None => None,
    };
    let valid_data = valid.as_ref().map(|(p, t)| CnnData { pairs: p, targets: t });
    let (stage2, stage2_log) = train_cnn::<f64>(
        &CnnData {
            pairs: &pairs2,
            targets: &t2,
        },
        valid_data.as_ref(),
        &resources.embeddings,
        &cnn_config,
    )?;
    log::info!("stage 2 trained, best epoch {}", stage2_log.best_epoch + 1);

    let (inst3, t3) = dataset_parts(&datasets[2]);
    let x3 = stage3_batch(&inst3, resources)?;
    let stage3 = fit_svm::<f64>(&x3, &t3, &balanced(&config.stage3, config.stage3_balanced, &t3))?;
    log::info!(
        "stage 3 trained, final objective {:?}",
        stage3.objective_history.last()
    );

    let mut manifest: BTreeMap<String, String> = loaded
        .hashes
        .iter()
        .map(|(k, v)| (format!("resource.{k}"), v.clone()))
        .collect();
    manifest.insert("schema.stage1".into(), stage1.schema_id.clone());
    manifest.insert("schema.stage3".into(), stage3.schema_id.clone());
    let report = TrainingReport {
        stage_sizes,
        stage1_objective: stage1.objective_history.clone(),
        stage2_log,
        stage3_objective: stage3.objective_history.clone(),
    };
    Ok((
        PipelineModel {
            stage1,
            stage2,
            stage3,
            document_frequency: df,
            keywords: config.keywords.clone(),
            manifest,
        },
        report,
    ))
}

/// Gold-filtered data of one stage, featurized once for repeated
/// cross-validation. Stage 2 keeps raw pairs since encoding depends on `k`/`p`.
pub struct StageCv {
    dataset: BinaryDataset,
    targets: Vec<bool>,
    features: Option<Vec<FeatureVector>>,
}

impl StageCv {
    pub fn prepare(
        corpus: &Corpus,
        stage: Stage,
        config: &PipelineConfig,
        loaded: &LoadedResources,
    ) -> Result<Self> {
        let resources = &loaded.resources;
        let dataset = stage_dataset(corpus, stage)?;
        let (instances, targets) = dataset_parts(&dataset);
        let features = match stage {
            Stage::Relevance => {
                let df = corpus_document_frequency(corpus, &resources.stopwords);
                let keywords =
                    KeywordExtractor::new(config.keywords.clone(), Some(df), resources.stopwords.clone())?;
                Some(stage1_batch(&instances, resources, &keywords)?)
            }
            Stage::AgreeDisagree => Some(stage3_batch(&instances, resources)?),
            Stage::NeutralStance => None,
        };
        Ok(StageCv {
            dataset,
            targets,
            features,
        })
    }

    pub fn targets(&self) -> &[bool] {
        &self.targets
    }

    /// Stratified k-fold macro-F1 of this stage under `config`. The CNN is
    /// trained for its full epoch budget on each fold, without early stopping.
    pub fn run(
        &self,
        config: &PipelineConfig,
        folds: usize,
        seed: u64,
        loaded: &LoadedResources,
    ) -> Result<CvReport> {
        let resources = &loaded.resources;
        let stage = self.dataset.stage;
        let names = stage.class_names();
        let pick = |idx: &[usize]| -> Vec<bool> { idx.iter().map(|&i| self.targets[i]).collect() };
        match &self.features {
            Some(x) => {
                let (svm, on) = if stage == Stage::Relevance {
                    (&config.stage1, config.stage1_balanced)
                } else {
                    (&config.stage3, config.stage3_balanced)
                };
                cross_validate(&self.targets, names, folds, seed, |train, held| {
                    let xs: Vec<FeatureVector> = train.iter().map(|&i| x[i].clone()).collect();
                    let ts = pick(train);
                    let model = fit_svm::<f64>(&xs, &ts, &balanced(svm, on, &ts))?;
                    held.iter().map(|&i| model.predict(&x[i])).collect()
                })
            }
            None => {
                let mut cnn_config = config.stage2.clone();
                cnn_config.d = resources.embeddings.dim();
                let (instances, _) = dataset_parts(&self.dataset);
                let pairs = encode_all(&instances, resources, &cnn_config)?;
                cross_validate(&self.targets, names, folds, seed, |train, held| {
                    let ps: Vec<EncodedPair> = train.iter().map(|&i| pairs[i].clone()).collect();
                    let ts = pick(train);
                    let data = CnnData {
                        pairs: &ps,
                        targets: &ts,
                    };
                    let (model, _) = train_cnn::<f64>(&data, None, &resources.embeddings, &cnn_config)?;
                    held.iter()
                        .map(|&i| {
                            let p =
                                model.probabilities(pairs[i].embed(&resources.embeddings, &cnn_config))?;
                            Ok(p[STANCE] >= 0.5)
                        })
                        .collect()
                })
            }
        }
    }
}

impl PipelineModel {
    pub fn keyword_extractor(&self, resources: &Resources) -> Result<KeywordExtractor> {
        KeywordExtractor::new(
            self.keywords.clone(),
            Some(self.document_frequency.clone()),
            resources.stopwords.clone(),
        )
    }

    /// Fails unless `loaded` hashes to what the models were trained with.
    pub fn check_resources(&self, loaded: &LoadedResources) -> Result<()> {
        for (name, found) in &loaded.hashes {
            let key = format!("resource.{name}");
            match self.manifest.get(&key) {
                Some(expected) if expected == found => {}
                Some(expected) => {
                    return Err(Error::ResourceMismatch {
                        name: name.clone(),
                        expected: expected.clone(),
                        found: found.clone(),
                    })
                }
                None => {
                    return Err(Error::ResourceMismatch {
                        name: name.clone(),
                        expected: "(absent)".into(),
                        found: found.clone(),
                    })
                }
            }
        }
        let schema3 = FeatureSchema::stage3(&loaded.resources.refuting).id;
        if self.stage3.schema_id != schema3 || self.stage1.schema_id != STAGE1_SCHEMA_ID {
            return Err(Error::SchemaMismatch {
                expected: format!("{STAGE1_SCHEMA_ID}, {schema3}"),
                found: format!("{}, {}", self.stage1.schema_id, self.stage3.schema_id),
            });
        }
        if self.stage2.config.d != loaded.resources.embeddings.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.stage2.config.d,
                found: loaded.resources.embeddings.dim(),
            });
        }
        Ok(())
    }

    fn stage2_probability(&self, instance_claim: &str, body: &str, resources: &Resources) -> Result<f64> {
        let pair = encode_pair(
            &resources.embeddings,
            &resources.sentiment,
            instance_claim,
            body,
            &self.stage2.config,
        )?;
        Ok(self
            .stage2
            .probabilities(pair.embed(&resources.embeddings, &self.stage2.config))?[STANCE])
    }

    /// Runs the cascade on one pair.
    pub fn predict(
        &self,
        claim: &str,
        body: &str,
        resources: &Resources,
    ) -> Result<(StanceLabel, StageTrace)> {
        let keywords = self.keyword_extractor(resources)?;
        let d1 = self
            .stage1
            .decision(&stage1_features(claim, body, resources, &keywords)?)?;
        let trace = self.finish(d1, claim, body, resources)?;
        Ok((trace.final_label, trace))
    }

    fn finish(&self, d1: f64, claim: &str, body: &str, resources: &Resources) -> Result<StageTrace> {
        let mut trace = StageTrace {
            stage1_decision: d1,
            stage2_probability: None,
            stage3_decision: None,
            final_label: StanceLabel::Unrelated,
        };
        if d1 < 0.0 {
            return Ok(trace);
        }
        let p = self.stage2_probability(claim, body, resources)?;
        trace.stage2_probability = Some(p);
        if p < 0.5 {
            trace.final_label = StanceLabel::Neutral;
            return Ok(trace);
        }
        let d3 = self.stage3.decision(&stage3_features(claim, body, resources)?)?;
        trace.stage3_decision = Some(d3);
        trace.final_label = if d3 >= 0.0 {
            StanceLabel::Disagree
        } else {
            StanceLabel::Agree
        };
        Ok(trace)
    }

    /// Cascade traces for every instance, in input order.
    pub fn predict_instances(
        &self,
        instances: &[&Instance],
        resources: &Resources,
    ) -> Result<Vec<StageTrace>> {
        let keywords = self.keyword_extractor(resources)?;
        let x1 = stage1_batch(instances, resources, &keywords)?;
        x1.par_iter()
            .zip(instances.par_iter())
            .map(|(x, inst)| {
                let d1 = self.stage1.decision(x)?;
                self.finish(d1, &inst.claim, &inst.body, resources)
            })
            .collect()
    }

    /// Cascade confusion matrix plus per-stage matrices on gold-filtered inputs.
    pub fn evaluate(&self, corpus: &Corpus, resources: &Resources) -> Result<(EvalReport, Vec<StageTrace>)> {
        if corpus.is_empty() {
            return Err(Error::InvalidArgument("evaluation corpus is empty".into()));
        }
        let golds = corpus.gold_labels()?;
        let instances: Vec<&Instance> = corpus.instances().iter().collect();
        let traces = self.predict_instances(&instances, resources)?;
        let preds: Vec<StanceLabel> = traces.iter().map(|t| t.final_label).collect();
        let overall = ConfusionMatrix::from_labels(&golds, &preds)?;

        let stage1_gold: Vec<bool> = golds.iter().map(|&g| g != StanceLabel::Unrelated).collect();
        let stage1_pred: Vec<bool> = traces.iter().map(|t| t.stage1_decision >= 0.0).collect();
        let mut stages = vec![StageReport::new(
            1,
            ConfusionMatrix::binary(Stage::Relevance.class_names(), &stage1_gold, &stage1_pred)?,
        )];

        let ds2 = derive_stage_dataset(corpus, Stage::NeutralStance)?;
        let (inst2, gold2) = dataset_parts(&ds2);
        let pred2 = inst2
            .par_iter()
            .map(|i| Ok(self.stage2_probability(&i.claim, &i.body, resources)? >= 0.5))
            .collect::<Result<Vec<bool>>>()?;
        stages.push(StageReport::new(
            2,
            ConfusionMatrix::binary(Stage::NeutralStance.class_names(), &gold2, &pred2)?,
        ));

        let ds3 = derive_stage_dataset(corpus, Stage::AgreeDisagree)?;
        let (inst3, gold3) = dataset_parts(&ds3);
        let pred3 = stage3_batch(&inst3, resources)?
            .iter()
            .map(|x| self.stage3.predict(x))
            .collect::<Result<Vec<bool>>>()?;
        stages.push(StageReport::new(
            3,
            ConfusionMatrix::binary(Stage::AgreeDisagree.class_names(), &gold3, &pred3)?,
        ));

        Ok((EvalReport::from_matrix(overall, stages)?, traces))
    }

    /// Writes the three models, the keyword table and a hash manifest.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.stage1.save(&dir.join(STAGE1_FILE))?;
        self.stage2.save(&dir.join(STAGE2_FILE))?;
        self.stage3.save(&dir.join(STAGE3_FILE))?;
        self.document_frequency.write(&dir.join(DF_FILE))?;
        let mut manifest = self.manifest.clone();
        manifest.insert("format_version".into(), MANIFEST_VERSION.into());
        for file in [STAGE1_FILE, STAGE2_FILE, STAGE3_FILE, DF_FILE] {
            manifest.insert(format!("file.{file}"), sha256_file(&dir.join(file))?);
        }
        manifest.insert("keywords".into(), serde_json::to_string(&self.keywords)?);
        let text: String = manifest.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// Loads a pipeline directory, verifying every file hash.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut manifest = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Malformed {
                path: path.clone(),
                line: n as u64 + 1,
                message: "expected key=value".into(),
            })?;
            manifest.insert(k.to_string(), v.to_string());
        }
        match manifest.remove("format_version").as_deref() {
            Some(MANIFEST_VERSION) => {}
            other => {
                return Err(Error::Format(format!(
                    "unsupported pipeline manifest version {other:?}"
                )))
            }
        }
        for file in [STAGE1_FILE, STAGE2_FILE, STAGE3_FILE, DF_FILE] {
            let expected = manifest
                .remove(&format!("file.{file}"))
                .ok_or_else(|| Error::Format(format!("manifest lacks a hash for {file}")))?;
            let found = sha256_file(&dir.join(file))?;
            if found != expected {
                return Err(Error::ResourceMismatch {
                    name: file.to_string(),
                    expected,
                    found,
                });
            }
        }
        let keywords = manifest
            .remove("keywords")
            .ok_or_else(|| Error::Format("manifest lacks keyword settings".into()))?;
        Ok(PipelineModel {
            stage1: SvmModel::load(&dir.join(STAGE1_FILE))?,
            stage2: CnnModel::load(&dir.join(STAGE2_FILE))?,
            stage3: SvmModel::load(&dir.join(STAGE3_FILE))?,
            document_frequency: DocumentFrequency::load(&dir.join(DF_FILE))?,
            keywords: serde_json::from_str(&keywords)?,
            manifest,
        })
    }
}
