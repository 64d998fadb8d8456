//! Stage-1 and stage-3 feature vectors and per-slot standardization.
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::embeddings::{cosine, EmbeddingTable};
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::sentiment::{SentimentLexicon, SentimentScores};
use crate::textproc::{
    char_ngrams, leading_sentences, proper_nouns, sentences, stem, tokenize, word_ngrams, KeywordExtractor,
    Multiset, Stopwords,
};

pub const STAGE1_SCHEMA_ID: &str = "stage1-v1";
pub const STAGE1_SLOTS: [&str; 13] = [
    "word_bigram_match",
    "word_trigram_match",
    "word_fourgram_match",
    "char_bigram_match",
    "char_trigram_match",
    "char_fourgram_match",
    "cooccurrence_first_255",
    "cooccurrence_full_body",
    "stem_overlap",
    "max_sentence_similarity",
    "embedding_similarity",
    "keyword_overlap",
    "proper_noun_overlap",
];

/// Body tokens considered by the first co-occurrence slot.
pub const LEAD_WORDS: usize = 255;
/// Body sentences fed to the document-side sentiment scores.
pub const LEAD_SENTENCES: usize = 10;

pub const CATEGORY_NAMES: [&str; 16] = [
    "analytical_thinking",
    "clout",
    "authentic",
    "emotional_tone",
    "conjugation",
    "negation",
    "comparison",
    "affective_processes",
    "positive_emotion",
    "negative_emotion",
    "anxiety",
    "anger",
    "sadness",
    "differentiation",
    "affiliation",
    "achieve",
];

const SENTIMENT_SLOTS: [&str; 4] = ["positive", "negative", "neutral", "compound"];
const DEFAULT_CATEGORIES: &str = include_str!("../data/categories.txt");
const DEFAULT_REFUTING: &str = include_str!("../data/refuting_words.txt");

/// Named, ordered feature slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub id: String,
    pub slots: Vec<String>,
}

impl FeatureSchema {
    pub fn stage1() -> Self {
        FeatureSchema {
            id: STAGE1_SCHEMA_ID.to_string(),
            slots: STAGE1_SLOTS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn stage3(refuting: &RefutingWords) -> Self {
        let mut slots = Vec::with_capacity(8 + CATEGORY_NAMES.len() + refuting.len());
        for side in ["claim", "body"] {
            slots.extend(SENTIMENT_SLOTS.iter().map(|s| format!("{side}_sentiment_{s}")));
        }
        slots.extend(CATEGORY_NAMES.iter().map(|c| format!("category_{c}")));
        slots.extend(refuting.words().iter().map(|w| format!("refutes_{w}")));
        FeatureSchema {
            id: format!("stage3-v1-r{}", refuting.len()),
            slots,
        }
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_id: String,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, schema_id: impl Into<String>) -> Result<Self> {
        let schema_id = schema_id.into();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "slot {i} of {schema_id} feature vector"
            )));
        }
        Ok(FeatureVector { values, schema_id })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sixteen named categories of stemmed trigger tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLexicon {
    categories: Vec<(String, HashSet<String>)>,
}

impl CategoryLexicon {
    /// Parses `[name]` sections of one stem per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, HashSet<String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                sections.entry(name.clone()).or_default();
                current = Some(name);
            } else {
                let name = current.as_ref().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "category lexicon line {}: entry before any [section]",
                        n + 1
                    ))
                })?;
                sections
                    .get_mut(name)
                    .expect("section registered")
                    .insert(line.to_lowercase());
            }
        }
        let mut categories = Vec::with_capacity(CATEGORY_NAMES.len());
        for name in CATEGORY_NAMES {
            match sections.remove(name) {
                Some(set) if !set.is_empty() => categories.push((name.to_string(), set)),
                Some(_) => return Err(Error::InvalidArgument(format!("category {name} is empty"))),
                None => return Err(Error::InvalidArgument(format!("category {name} is missing"))),
            }
        }
        if let Some(extra) = sections.keys().next() {
            return Err(Error::InvalidArgument(format!("unknown category {extra}")));
        }
        Ok(CategoryLexicon { categories })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Per category, matching body stems over the body token count.
    pub fn scores(&self, stems: &[String]) -> Vec<f64> {
        if stems.is_empty() {
            return vec![0.0; self.categories.len()];
        }
        let n = stems.len() as f64;
        self.categories
            .iter()
            .map(|(_, triggers)| stems.iter().filter(|s| triggers.contains(*s)).count() as f64 / n)
            .collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|(n, _)| n.as_str())
    }
}

impl Default for CategoryLexicon {
    fn default() -> Self {
        CategoryLexicon::parse(DEFAULT_CATEGORIES).expect("bundled category lexicon is well-formed")
    }
}

/// Ordered refuting-word list; membership is tested on stems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefutingWords {
    words: Vec<String>,
    stems: Vec<String>,
}

impl RefutingWords {
    pub fn parse(text: &str) -> Result<Self> {
        let mut words: Vec<String> = Vec::new();
        for w in text.lines().map(|l| l.trim().to_lowercase()) {
            if !w.is_empty() && !w.starts_with('#') && !words.contains(&w) {
                words.push(w);
            }
        }
        if words.is_empty() {
            return Err(Error::InvalidArgument("refuting-word list is empty".into()));
        }
        let stems = words.iter().map(|w| stem(w)).collect();
        Ok(RefutingWords { words, stems })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn indicators(&self, body_stems: &HashSet<&str>) -> Vec<f64> {
        self.stems
            .iter()
            .map(|s| if body_stems.contains(s.as_str()) { 1.0 } else { 0.0 })
            .collect()
    }
}

impl Default for RefutingWords {
    fn default() -> Self {
        RefutingWords::parse(DEFAULT_REFUTING).expect("bundled refuting list is well-formed")
    }
}

/// Immutable lexical resources shared by every stage.
#[derive(Debug, Clone)]
pub struct Resources {
    pub embeddings: EmbeddingTable,
    pub sentiment: SentimentLexicon,
    pub categories: CategoryLexicon,
    pub refuting: RefutingWords,
    pub stopwords: Stopwords,
}

impl Resources {
    /// Bundled lexicons around the given embedding table.
    pub fn with_embeddings(embeddings: EmbeddingTable) -> Self {
        Resources {
            embeddings,
            sentiment: SentimentLexicon::default(),
            categories: CategoryLexicon::default(),
            refuting: RefutingWords::default(),
            stopwords: Stopwords::default(),
        }
    }
}

/// Per-text analysis reused across every pair the text takes part in.
#[derive(Debug, Clone)]
pub struct TextAnalysis {
    tokens: Vec<String>,
    token_set: HashSet<String>,
    lead_set: HashSet<String>,
    word_grams: [Multiset<Vec<String>>; 3],
    char_grams: [Multiset<String>; 3],
    stems: Multiset<String>,
    sentence_tf: Vec<BTreeMap<String, f64>>,
    whole_tf: BTreeMap<String, f64>,
    embedding: Vec<f32>,
    keywords: BTreeSet<String>,
    proper_nouns: BTreeSet<String>,
}

fn tf(stems: impl IntoIterator<Item = String>) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for s in stems {
        *out.entry(s).or_insert(0.0) += 1.0;
    }
    out
}

fn sparse_cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let norm = |m: &BTreeMap<String, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().filter_map(|(k, v)| b.get(k).map(|w| v * w)).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

impl TextAnalysis {
    pub fn new(text: &str, resources: &Resources, keywords: &KeywordExtractor) -> Result<Self> {
        let seq = tokenize(text);
        let tokens = seq.tokens().to_vec();
        let stems = seq.stems();
        let word_grams = [
            word_ngrams(&tokens, 2)?,
            word_ngrams(&tokens, 3)?,
            word_ngrams(&tokens, 4)?,
        ];
        let char_grams = [
            char_ngrams(text, 2)?,
            char_ngrams(text, 3)?,
            char_ngrams(text, 4)?,
        ];
        let sentence_tf = sentences(text).iter().map(|s| tf(tokenize(s).stems())).collect();
        Ok(TextAnalysis {
            token_set: tokens.iter().cloned().collect(),
            lead_set: tokens.iter().take(LEAD_WORDS).cloned().collect(),
            word_grams,
            char_grams,
            whole_tf: tf(stems.iter().cloned()),
            stems: stems.into_iter().collect(),
            sentence_tf,
            embedding: resources.embeddings.avg_vector(&seq).vector,
            keywords: keywords.extract(text)?,
            proper_nouns: proper_nouns(text, &resources.stopwords),
            tokens,
        })
    }
}

/// Stage-1 slots for an analysed claim/body pair.
pub fn stage1_from(claim: &TextAnalysis, body: &TextAnalysis) -> Result<FeatureVector> {
    let mut v = Vec::with_capacity(STAGE1_SLOTS.len());
    for (c, b) in claim.word_grams.iter().zip(&body.word_grams) {
        v.push(c.intersection_size(b) as f64);
    }
    for (c, b) in claim.char_grams.iter().zip(&body.char_grams) {
        v.push(c.intersection_size(b) as f64);
    }
    v.push(claim.tokens.iter().filter(|t| body.lead_set.contains(*t)).count() as f64);
    v.push(
        claim
            .tokens
            .iter()
            .filter(|t| body.token_set.contains(*t))
            .count() as f64,
    );
    v.push(claim.stems.intersection_size(&body.stems) as f64);
    v.push(
        body.sentence_tf
            .iter()
            .map(|s| sparse_cosine(&claim.whole_tf, s))
            .fold(0.0, f64::max),
    );
    v.push(cosine(&claim.embedding, &body.embedding)? as f64);
    v.push(claim.keywords.intersection(&body.keywords).count() as f64);
    v.push(claim.proper_nouns.intersection(&body.proper_nouns).count() as f64);
    FeatureVector::new(v, STAGE1_SCHEMA_ID)
}

pub fn stage1_features(
    claim: &str,
    body: &str,
    resources: &Resources,
    keywords: &KeywordExtractor,
) -> Result<FeatureVector> {
    stage1_from(
        &TextAnalysis::new(claim, resources, keywords)?,
        &TextAnalysis::new(body, resources, keywords)?,
    )
}

/// Body-side part of the stage-3 vector.
#[derive(Debug, Clone)]
pub struct BodyStance {
    sentiment: SentimentScores,
    categories: Vec<f64>,
    refuting: Vec<f64>,
}

impl BodyStance {
    pub fn new(body: &str, resources: &Resources) -> Self {
        let stems = tokenize(body).stems();
        let set: HashSet<&str> = stems.iter().map(String::as_str).collect();
        BodyStance {
            sentiment: resources
                .sentiment
                .analyze(&leading_sentences(body, LEAD_SENTENCES)),
            categories: resources.categories.scores(&stems),
            refuting: resources.refuting.indicators(&set),
        }
    }
}

pub fn stage3_from(
    claim_sentiment: SentimentScores,
    body: &BodyStance,
    schema_id: &str,
) -> Result<FeatureVector> {
    let mut v = Vec::with_capacity(8 + body.categories.len() + body.refuting.len());
    v.extend(claim_sentiment.to_array());
    v.extend(body.sentiment.to_array());
    v.extend(&body.categories);
    v.extend(&body.refuting);
    FeatureVector::new(v, schema_id)
}

pub fn stage3_features(claim: &str, body: &str, resources: &Resources) -> Result<FeatureVector> {
    let schema = FeatureSchema::stage3(&resources.refuting);
    stage3_from(
        resources.sentiment.analyze(claim),
        &BodyStance::new(body, resources),
        &schema.id,
    )
}

/// Groups instance indices by body id, in first-seen order.
fn by_body(instances: &[&Instance]) -> Vec<(usize, Vec<usize>)> {
    let mut order: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, inst) in instances.iter().enumerate() {
        match seen.get(inst.body_id.as_str()) {
            Some(&g) => order[g].1.push(i),
            None => {
                seen.insert(&inst.body_id, order.len());
                order.push((i, vec![i]));
            }
        }
    }
    order
}

fn scatter(n: usize, groups: Vec<Vec<(usize, FeatureVector)>>) -> Vec<FeatureVector> {
    let mut out: Vec<Option<FeatureVector>> = vec![None; n];
    for (i, v) in groups.into_iter().flatten() {
        out[i] = Some(v);
    }
    out.into_iter().map(|v| v.expect("every index filled")).collect()
}

/// Stage-1 vectors for many instances; each body is analysed once.
pub fn stage1_batch(
    instances: &[&Instance],
    resources: &Resources,
    keywords: &KeywordExtractor,
) -> Result<Vec<FeatureVector>> {
    let claims: BTreeSet<&str> = instances.iter().map(|i| i.claim.as_str()).collect();
    let claim_analysis: HashMap<&str, TextAnalysis> = claims
        .into_par_iter()
        .map(|c| TextAnalysis::new(c, resources, keywords).map(|a| (c, a)))
        .collect::<Result<_>>()?;
    let groups = by_body(instances)
        .into_par_iter()
        .map(|(first, members)| {
            let body = TextAnalysis::new(&instances[first].body, resources, keywords)?;
            members
                .into_iter()
                .map(|i| {
                    Ok((
                        i,
                        stage1_from(&claim_analysis[instances[i].claim.as_str()], &body)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(scatter(instances.len(), groups))
}

/// Stage-3 vectors for many instances; each body is analysed once.
pub fn stage3_batch(instances: &[&Instance], resources: &Resources) -> Result<Vec<FeatureVector>> {
    let schema = FeatureSchema::stage3(&resources.refuting);
    let groups = by_body(instances)
        .into_par_iter()
        .map(|(first, members)| {
            let body = BodyStance::new(&instances[first].body, resources);
            members
                .into_iter()
                .map(|i| {
                    let claim = resources.sentiment.analyze(&instances[i].claim);
                    Ok((i, stage3_from(claim, &body, &schema.id)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(scatter(instances.len(), groups))
}

/// Writes a feature matrix with a schema header row and an optional label column.
pub fn write_csv(
    path: &Path,
    schema: &FeatureSchema,
    rows: &[FeatureVector],
    labels: Option<&[String]>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = schema.slots.clone();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        if row.schema_id != schema.id {
            return Err(Error::SchemaMismatch {
                expected: schema.id.clone(),
                found: row.schema_id.clone(),
            });
        }
        let mut rec: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
        if let Some(labels) = labels {
            rec.push(labels[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Per-slot mean and population standard deviation from training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Scaler<T: Scalar> {
    pub schema_id: String,
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

/// Deviations below this are treated as constant slots.
pub const MIN_STD: f64 = 1e-12;

impl<T: Scalar> Scaler<T> {
    pub fn fit(rows: &[FeatureVector]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidArgument("cannot fit a scaler on no data".into()))?;
        let dim = first.len();
        for r in rows {
            if r.schema_id != first.schema_id {
                return Err(Error::SchemaMismatch {
                    expected: first.schema_id.clone(),
                    found: r.schema_id.clone(),
                });
            }
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0f64; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(&r.values) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0f64; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(&r.values).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                // constant slots pass through centred but unscaled
                T::of(if sd < MIN_STD { 1.0 } else { sd })
            })
            .collect();
        Ok(Scaler {
            schema_id: first.schema_id.clone(),
            mean: mean.into_iter().map(T::of).collect(),
            std,
        })
    }

    /// Identity transform for `dim` slots.
    pub fn identity(schema_id: impl Into<String>, dim: usize) -> Self {
        Scaler {
            schema_id: schema_id.into(),
            mean: vec![T::zero(); dim],
            std: vec![T::one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &FeatureVector) -> Result<Vec<T>> {
        if x.schema_id != self.schema_id {
            return Err(Error::SchemaMismatch {
                expected: self.schema_id.clone(),
                found: x.schema_id.clone(),
            });
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(x.values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (T::of(v) - m) / s)
            .collect())
    }
}
