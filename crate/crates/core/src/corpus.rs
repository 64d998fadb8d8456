//! FNC-format corpus ingestion, per-stage binary datasets and seeded splits.
//!
//! The stance file carries `Headline,Body ID,Stance` (the stance column is
//! optional for prediction input) and the body file `Body ID,articleBody`.
//! Both are RFC-4180 CSV; bodies routinely contain quoted newlines.
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gold or predicted stance of a document toward a claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StanceLabel {
    Unrelated,
    Neutral,
    Agree,
    Disagree,
}

impl StanceLabel {
    pub const ALL: [StanceLabel; 4] = [
        StanceLabel::Unrelated,
        StanceLabel::Neutral,
        StanceLabel::Agree,
        StanceLabel::Disagree,
    ];

    /// Spelling used in FNC stance files.
    pub fn corpus_name(self) -> &'static str {
        match self {
            StanceLabel::Unrelated => "unrelated",
            StanceLabel::Neutral => "discuss",
            StanceLabel::Agree => "agree",
            StanceLabel::Disagree => "disagree",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            StanceLabel::Unrelated => "Unrelated",
            StanceLabel::Neutral => "Neutral",
            StanceLabel::Agree => "Agree",
            StanceLabel::Disagree => "Disagree",
        }
    }

    pub fn relevance(self) -> Relevance {
        match self {
            StanceLabel::Unrelated => Relevance::Unrelated,
            _ => Relevance::Related,
        }
    }

    pub fn related_kind(self) -> Option<RelatedKind> {
        match self {
            StanceLabel::Unrelated => None,
            StanceLabel::Neutral => Some(RelatedKind::Neutral),
            StanceLabel::Agree | StanceLabel::Disagree => Some(RelatedKind::Stance),
        }
    }

    pub fn stance_kind(self) -> Option<StanceKind> {
        match self {
            StanceLabel::Agree => Some(StanceKind::Agree),
            StanceLabel::Disagree => Some(StanceKind::Disagree),
            _ => None,
        }
    }
}

impl FromStr for StanceLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unrelated" => Ok(StanceLabel::Unrelated),
            "discuss" => Ok(StanceLabel::Neutral),
            "agree" => Ok(StanceLabel::Agree),
            "disagree" => Ok(StanceLabel::Disagree),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// First level of the stance hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relevance {
    Unrelated,
    Related,
}

/// Second level: a related document is neutral or takes a stance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelatedKind {
    Neutral,
    Stance,
}

/// Third level: a stance is agreement or disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StanceKind {
    Agree,
    Disagree,
}

/// One claim/document pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub claim: String,
    pub body_id: String,
    pub body: Arc<str>,
    pub label: Option<StanceLabel>,
}

/// Per-label instance counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub unrelated: usize,
    pub neutral: usize,
    pub agree: usize,
    pub disagree: usize,
    pub unlabeled: usize,
}

impl LabelCounts {
    pub fn get(&self, label: StanceLabel) -> usize {
        match label {
            StanceLabel::Unrelated => self.unrelated,
            StanceLabel::Neutral => self.neutral,
            StanceLabel::Agree => self.agree,
            StanceLabel::Disagree => self.disagree,
        }
    }

    pub fn total(&self) -> usize {
        self.unrelated + self.neutral + self.agree + self.disagree + self.unlabeled
    }
}

/// Ordered instances plus the body table they reference.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    instances: Vec<Instance>,
    bodies: BTreeMap<String, Arc<str>>,
}

#[derive(Debug, Deserialize)]
struct StanceRow {
    #[serde(rename = "Headline")]
    headline: String,
    #[serde(rename = "Body ID")]
    body_id: String,
    #[serde(rename = "Stance", default)]
    stance: Option<String>,
}

#[derive(Debug, Deserialize)]
struct BodyRow {
    #[serde(rename = "Body ID")]
    body_id: String,
    #[serde(rename = "articleBody")]
    body: String,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn malformed(path: &Path, line: u64, err: &csv::Error) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line: err.position().map(|p| p.line()).unwrap_or(line),
        message: err.to_string(),
    }
}

fn read_row(reader: &mut csv::Reader<File>, record: &mut csv::StringRecord, path: &Path) -> Result<bool> {
    let line = reader.position().line();
    reader.read_record(record).map_err(|e| malformed(path, line, &e))
}

fn decode_row<T: serde::de::DeserializeOwned>(
    record: &csv::StringRecord,
    headers: &csv::StringRecord,
    path: &Path,
) -> Result<T> {
    let line = record.position().map(|p| p.line()).unwrap_or(0);
    record
        .deserialize(Some(headers))
        .map_err(|e| malformed(path, line, &e))
}

fn check_headers(path: &Path, headers: &csv::StringRecord, required: &[&str]) -> Result<()> {
    for name in required {
        if !headers.iter().any(|h| h == *name) {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 1,
                message: format!(
                    "missing column {name:?} (found {:?})",
                    headers.iter().collect::<Vec<_>>()
                ),
            });
        }
    }
    Ok(())
}

/// Reads a body file into an id -> text table.
pub fn load_bodies(path: &Path) -> Result<BTreeMap<String, Arc<str>>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(open(path)?);
    let headers = reader.headers()?.clone();
    check_headers(path, &headers, &["Body ID", "articleBody"])?;
    let mut bodies = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while read_row(&mut reader, &mut record, path)? {
        let row: BodyRow = decode_row(&record, &headers, path)?;
        bodies.insert(row.body_id.trim().to_string(), Arc::from(row.body.as_str()));
    }
    Ok(bodies)
}

/// Loads a stance file joined against its body file.
pub fn load_corpus(stances_path: &Path, bodies_path: &Path) -> Result<Corpus> {
    let bodies = load_bodies(bodies_path)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(open(stances_path)?);
    let headers = reader.headers()?.clone();
    check_headers(stances_path, &headers, &["Headline", "Body ID"])?;

    let mut instances = Vec::new();
    let mut seen = HashSet::new();
    let mut record = csv::StringRecord::new();
    while read_row(&mut reader, &mut record, stances_path)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: StanceRow = decode_row(&record, &headers, stances_path)?;
        if row.headline.trim().is_empty() {
            return Err(Error::Malformed {
                path: stances_path.to_path_buf(),
                line,
                message: "empty headline".into(),
            });
        }
        let body_id = row.body_id.trim().to_string();
        let body = bodies
            .get(&body_id)
            .cloned()
            .ok_or_else(|| Error::UnresolvedBody {
                body_id: body_id.clone(),
                line,
            })?;
        if !seen.insert((row.headline.clone(), body_id.clone())) {
            return Err(Error::DuplicatePair { body_id, line });
        }
        let label = match row.stance.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(s.parse()?),
        };
        instances.push(Instance {
            claim: row.headline,
            body_id,
            body,
            label,
        });
    }
    let corpus = Corpus { instances, bodies };
    log::info!("{}", corpus.summary());
    Ok(corpus)
}

impl Corpus {
    /// Builds a corpus from in-memory parts, enforcing the same invariants as loading.
    pub fn from_parts(
        rows: impl IntoIterator<Item = (String, String, Option<StanceLabel>)>,
        bodies: BTreeMap<String, String>,
    ) -> Result<Corpus> {
        let bodies: BTreeMap<String, Arc<str>> = bodies
            .into_iter()
            .map(|(k, v)| (k, Arc::from(v.as_str())))
            .collect();
        let mut seen = HashSet::new();
        let mut instances = Vec::new();
        for (i, (claim, body_id, label)) in rows.into_iter().enumerate() {
            let line = i as u64 + 2;
            if claim.trim().is_empty() {
                return Err(Error::InvalidArgument(format!("empty claim at row {i}")));
            }
            let body = bodies
                .get(&body_id)
                .cloned()
                .ok_or_else(|| Error::UnresolvedBody {
                    body_id: body_id.clone(),
                    line,
                })?;
            if !seen.insert((claim.clone(), body_id.clone())) {
                return Err(Error::DuplicatePair { body_id, line });
            }
            instances.push(Instance {
                claim,
                body_id,
                body,
                label,
            });
        }
        Ok(Corpus { instances, bodies })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn bodies(&self) -> &BTreeMap<String, Arc<str>> {
        &self.bodies
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_counts(&self) -> LabelCounts {
        let mut counts = LabelCounts::default();
        for inst in &self.instances {
            match inst.label {
                Some(StanceLabel::Unrelated) => counts.unrelated += 1,
                Some(StanceLabel::Neutral) => counts.neutral += 1,
                Some(StanceLabel::Agree) => counts.agree += 1,
                Some(StanceLabel::Disagree) => counts.disagree += 1,
                None => counts.unlabeled += 1,
            }
        }
        counts
    }

    pub fn summary(&self) -> LoadSummary {
        LoadSummary {
            instances: self.instances.len(),
            bodies: self.bodies.len(),
            counts: self.label_counts(),
        }
    }

    /// Gold labels in instance order; fails on the first unlabeled instance.
    pub fn gold_labels(&self) -> Result<Vec<StanceLabel>> {
        self.instances
            .iter()
            .enumerate()
            .map(|(index, inst)| inst.label.ok_or(Error::Unlabeled { index }))
            .collect()
    }

    /// Writes the corpus back out in FNC layout. Unlabeled corpora omit the
    /// stance column.
    pub fn write(&self, stances_path: &Path, bodies_path: &Path) -> Result<()> {
        let labeled = self.instances.iter().all(|i| i.label.is_some());
        let mut w = csv::Writer::from_path(stances_path)?;
        if labeled {
            w.write_record(["Headline", "Body ID", "Stance"])?;
        } else {
            w.write_record(["Headline", "Body ID"])?;
        }
        for inst in &self.instances {
            match inst.label {
                Some(label) if labeled => {
                    w.write_record([inst.claim.as_str(), &inst.body_id, label.corpus_name()])?
                }
                _ => w.write_record([inst.claim.as_str(), &inst.body_id])?,
            }
        }
        w.flush().map_err(|e| Error::io(stances_path, e))?;

        let mut w = csv::Writer::from_path(bodies_path)?;
        w.write_record(["Body ID", "articleBody"])?;
        for (id, body) in &self.bodies {
            w.write_record([id.as_str(), body])?;
        }
        w.flush().map_err(|e| Error::io(bodies_path, e))?;
        Ok(())
    }

    /// Subset of instances by index, sharing the body table.
    pub fn select(&self, indices: &[usize]) -> Corpus {
        Corpus {
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            bodies: self.bodies.clone(),
        }
    }

    /// Per-label stratified sample keeping `fraction` of each class, in file order.
    pub fn stratified_sample(&self, fraction: f64, seed: u64) -> Result<Corpus> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sample fraction {fraction} outside (0,1]"
            )));
        }
        let mut by_label: BTreeMap<Option<StanceLabel>, Vec<usize>> = BTreeMap::new();
        for (i, inst) in self.instances.iter().enumerate() {
            by_label.entry(inst.label).or_default().push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep = Vec::new();
        for (_, mut idx) in by_label {
            let n = ((idx.len() as f64) * fraction).round().max(1.0) as usize;
            idx.shuffle(&mut rng);
            keep.extend_from_slice(&idx[..n.min(idx.len())]);
        }
        keep.sort_unstable();
        Ok(self.select(&keep))
    }
}

/// Load-time report: instance/body totals and per-label counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub instances: usize,
    pub bodies: usize,
    pub counts: LabelCounts,
}

impl fmt::Display for LoadSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances: {}", self.instances)?;
        writeln!(f, "bodies: {}", self.bodies)?;
        writeln!(f, "unrelated: {}", self.counts.unrelated)?;
        writeln!(f, "neutral: {}", self.counts.neutral)?;
        writeln!(f, "agree: {}", self.counts.agree)?;
        write!(f, "disagree: {}", self.counts.disagree)?;
        if self.counts.unlabeled > 0 {
            write!(f, "\nunlabeled: {}", self.counts.unlabeled)?;
        }
        Ok(())
    }
}

/// The three binary decisions of the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Relevance,
    NeutralStance,
    AgreeDisagree,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Relevance, Stage::NeutralStance, Stage::AgreeDisagree];

    /// (negative, positive) class names.
    pub fn class_names(self) -> (&'static str, &'static str) {
        match self {
            Stage::Relevance => ("Unrelated", "Related"),
            Stage::NeutralStance => ("Neutral", "Stance"),
            Stage::AgreeDisagree => ("Agree", "Disagree"),
        }
    }

    pub fn number(self) -> usize {
        match self {
            Stage::Relevance => 1,
            Stage::NeutralStance => 2,
            Stage::AgreeDisagree => 3,
        }
    }

    /// `Some(true)` for the positive class, `Some(false)` for the negative
    /// class, `None` when the stage does not admit the label.
    pub fn side(self, label: StanceLabel) -> Option<bool> {
        match self {
            Stage::Relevance => Some(label.relevance() == Relevance::Related),
            Stage::NeutralStance => label.related_kind().map(|k| k == RelatedKind::Stance),
            Stage::AgreeDisagree => label.stance_kind().map(|k| k == StanceKind::Disagree),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (neg, pos) = self.class_names();
        write!(f, "stage {} ({neg}/{pos})", self.number())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "relevance" => Ok(Stage::Relevance),
            "2" | "neutral-stance" | "neutralstance" => Ok(Stage::NeutralStance),
            "3" | "agree-disagree" | "agreedisagree" => Ok(Stage::AgreeDisagree),
            _ => Err(Error::InvalidArgument(format!("unknown stage {s:?}"))),
        }
    }
}

/// Instances admitted to one stage, partitioned into its two classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    pub stage: Stage,
    pub positives: Vec<Instance>,
    pub negatives: Vec<Instance>,
    pub positive_class_name: String,
    pub negative_class_name: String,
}

impl BinaryDataset {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Instances with their binary target, negatives and positives
    /// interleaved back into a single list ordered by class (negatives first).
    pub fn labeled(&self) -> impl Iterator<Item = (&Instance, bool)> {
        self.negatives
            .iter()
            .map(|i| (i, false))
            .chain(self.positives.iter().map(|i| (i, true)))
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.positives.is_empty() || self.negatives.is_empty() {
            let present = if self.positives.is_empty() {
                &self.negative_class_name
            } else {
                &self.positive_class_name
            };
            return Err(Error::SingleClass {
                stage: self.stage.to_string(),
                present: if self.is_empty() {
                    "none".into()
                } else {
                    present.clone()
                },
            });
        }
        Ok(())
    }
}

/// Derives the binary dataset of one cascade stage from gold labels.
pub fn derive_stage_dataset(corpus: &Corpus, stage: Stage) -> Result<BinaryDataset> {
    let (neg, pos) = stage.class_names();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (index, inst) in corpus.instances().iter().enumerate() {
        let label = inst.label.ok_or(Error::Unlabeled { index })?;
        match stage.side(label) {
            Some(true) => positives.push(inst.clone()),
            Some(false) => negatives.push(inst.clone()),
            None => {}
        }
    }
    log::debug!("{stage}: {} {neg} / {} {pos}", negatives.len(), positives.len());
    Ok(BinaryDataset {
        stage,
        positives,
        negatives,
        positive_class_name: pos.to_string(),
        negative_class_name: neg.to_string(),
    })
}

fn holdout_count(n: usize, fraction: f64) -> usize {
    ((n as f64) * fraction).round().clamp(1.0, (n - 1) as f64) as usize
}

fn split_class(items: &[Instance], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<Instance>, Vec<Instance>) {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(rng);
    let mut held: Vec<usize> = order[..holdout_count(items.len(), fraction)].to_vec();
    held.sort_unstable();
    let held_set: HashSet<usize> = held.iter().copied().collect();
    let train = (0..items.len())
        .filter(|i| !held_set.contains(i))
        .map(|i| items[i].clone())
        .collect();
    let holdout = held.into_iter().map(|i| items[i].clone()).collect();
    (train, holdout)
}

/// Splits a dataset into (train, holdout), preserving class proportions.
pub fn stratified_split(
    dataset: &BinaryDataset,
    holdout_fraction: f64,
    seed: u64,
) -> Result<(BinaryDataset, BinaryDataset)> {
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "holdout fraction {holdout_fraction} outside (0,1)"
        )));
    }
    for (name, items) in [
        (&dataset.positive_class_name, &dataset.positives),
        (&dataset.negative_class_name, &dataset.negatives),
    ] {
        if items.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: name.clone(),
                count: items.len(),
                required: 2,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pos_train, pos_hold) = split_class(&dataset.positives, holdout_fraction, &mut rng);
    let (neg_train, neg_hold) = split_class(&dataset.negatives, holdout_fraction, &mut rng);
    let make = |positives, negatives| BinaryDataset {
        stage: dataset.stage,
        positives,
        negatives,
        positive_class_name: dataset.positive_class_name.clone(),
        negative_class_name: dataset.negative_class_name.clone(),
    };
    Ok((make(pos_train, neg_train), make(pos_hold, neg_hold)))
}

/// Stratified k-fold assignment: returns the fold index of every item given
/// its binary class. Each class is shuffled and dealt round-robin.
pub fn stratified_folds(targets: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; targets.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..targets.len()).filter(|&i| targets[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::ClassTooSmall {
                class: if class {
                    "positive".into()
                } else {
                    "negative".into()
                },
                count: idx.len(),
                required: folds,
            });
        }
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(pos: usize, neg: usize) -> BinaryDataset {
        let inst = |i: usize| Instance {
            claim: format!("claim {i}"),
            body_id: i.to_string(),
            body: Arc::from("body"),
            label: None,
        };
        BinaryDataset {
            stage: Stage::Relevance,
            positives: (0..pos).map(inst).collect(),
            negatives: (pos..pos + neg).map(inst).collect(),
            positive_class_name: "Related".into(),
            negative_class_name: "Unrelated".into(),
        }
    }

    #[test]
    fn label_parsing() {
        assert_eq!("DISCUSS".parse::<StanceLabel>().unwrap(), StanceLabel::Neutral);
        assert_eq!("Agree".parse::<StanceLabel>().unwrap(), StanceLabel::Agree);
        assert!("neutral".parse::<StanceLabel>().is_err());
        assert!("".parse::<StanceLabel>().is_err());
    }

    #[test]
    fn hierarchy_is_total() {
        for label in StanceLabel::ALL {
            match label.relevance() {
                Relevance::Unrelated => assert!(label.related_kind().is_none()),
                Relevance::Related => {
                    let kind = label.related_kind().unwrap();
                    assert_eq!(kind == RelatedKind::Stance, label.stance_kind().is_some());
                }
            }
        }
    }

    #[test]
    fn split_exact_stratification() {
        let ds = toy(100, 100);
        let (train, hold) = stratified_split(&ds, 0.2, 7).unwrap();
        assert_eq!((hold.positives.len(), hold.negatives.len()), (20, 20));
        assert_eq!((train.positives.len(), train.negatives.len()), (80, 80));
        let again = stratified_split(&ds, 0.2, 7).unwrap();
        assert_eq!(again.1, hold);
        assert_eq!(again.0, train);
    }

    #[test]
    fn split_union_is_input() {
        let ds = toy(13, 29);
        let (train, hold) = stratified_split(&ds, 0.3, 1).unwrap();
        let mut all: Vec<_> = train
            .positives
            .iter()
            .chain(&hold.positives)
            .chain(&train.negatives)
            .chain(&hold.negatives)
            .map(|i| i.body_id.clone())
            .collect();
        all.sort();
        let mut expected: Vec<_> = ds.labeled().map(|(i, _)| i.body_id.clone()).collect();
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_rejects_small_class_and_bad_fraction() {
        assert!(matches!(
            stratified_split(&toy(10, 1), 0.5, 0),
            Err(Error::ClassTooSmall { .. })
        ));
        assert!(stratified_split(&toy(10, 10), 0.0, 0).is_err());
        assert!(stratified_split(&toy(10, 10), 1.0, 0).is_err());
    }

    #[test]
    fn folds_cover_every_index() {
        let targets: Vec<bool> = (0..50).map(|i| i % 5 == 0).collect();
        let folds = stratified_folds(&targets, 5, 3).unwrap();
        for k in 0..5 {
            let pos = (0..50).filter(|&i| folds[i] == k && targets[i]).count();
            assert_eq!(pos, 2);
        }
    }
}
