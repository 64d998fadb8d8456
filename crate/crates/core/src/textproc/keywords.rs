//! Keyword extraction: offline tf·idf ranking, or a remote HTTP service with
//! retries, a concurrency cap and optional offline fallback.
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use url::Url;

use super::{tokenize, Stopwords};
use crate::error::{Error, Result};

const RETRIES: u32 = 2;
const BACKOFF_BASE_MS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeywordMode {
    OfflineTfIdf,
    RemoteService,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordProviderConfig {
    pub mode: KeywordMode,
    pub k: usize,
    pub endpoint: Option<String>,
    pub timeout: Duration,
    pub fallback_to_offline: bool,
    /// Maximum in-flight remote requests.
    pub max_concurrent: usize,
}

impl Default for KeywordProviderConfig {
    fn default() -> Self {
        KeywordProviderConfig {
            mode: KeywordMode::OfflineTfIdf,
            k: 10,
            endpoint: None,
            timeout: Duration::from_secs(5),
            fallback_to_offline: true,
            max_concurrent: 4,
        }
    }
}

impl KeywordProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("keyword k must be positive".into()));
        }
        if self.max_concurrent == 0 {
            return Err(Error::InvalidArgument(
                "keyword max_concurrent must be positive".into(),
            ));
        }
        if self.mode == KeywordMode::RemoteService {
            let endpoint = self
                .endpoint
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("remote keyword mode requires an endpoint".into()))?;
            let url = Url::parse(endpoint)
                .map_err(|e| Error::InvalidArgument(format!("keyword endpoint {endpoint:?}: {e}")))?;
            if !matches!(url.scheme(), "http" | "https") {
                return Err(Error::InvalidArgument(format!(
                    "keyword endpoint must be http(s): {endpoint}"
                )));
            }
        }
        Ok(())
    }
}

/// Background document frequencies for idf weighting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentFrequency {
    documents: usize,
    counts: BTreeMap<String, usize>,
}

impl DocumentFrequency {
    /// Counts, per token, the documents it occurs in (stopwords skipped).
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a str>, stopwords: &Stopwords) -> Self {
        let mut df = DocumentFrequency::default();
        for doc in docs {
            df.documents += 1;
            let distinct: BTreeSet<String> = tokenize(doc)
                .tokens()
                .iter()
                .filter(|t| !stopwords.contains(t))
                .cloned()
                .collect();
            for t in distinct {
                *df.counts.entry(t).or_insert(0) += 1;
            }
        }
        df
    }

    /// Empty table: every token gets the same idf.
    pub fn uniform() -> Self {
        DocumentFrequency::default()
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    /// Smoothed idf, `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.counts.get(token).copied().unwrap_or(0) as f64;
        ((1.0 + self.documents as f64) / (1.0 + df)).ln() + 1.0
    }

    /// Tab-separated `token<TAB>count`, preceded by a `#documents<TAB>N` line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "#documents\t{}", self.documents)?;
            for (t, c) in &self.counts {
                writeln!(out, "{t}\t{c}")?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut df = DocumentFrequency::default();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let bad = || Error::Malformed {
                path: path.to_path_buf(),
                line: n as u64 + 1,
                message: format!("expected token<TAB>count, got {line:?}"),
            };
            let (key, value) = line.split_once('\t').ok_or_else(bad)?;
            let value: usize = value.trim().parse().map_err(|_| bad())?;
            if key == "#documents" {
                df.documents = value;
            } else {
                df.counts.insert(key.to_string(), value);
            }
        }
        Ok(df)
    }
}

/// Where a keyword set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeywordSource {
    Offline,
    Remote,
    OfflineFallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keywords {
    pub terms: BTreeSet<String>,
    pub source: KeywordSource,
}

/// Counting semaphore bounding concurrent remote requests.
#[derive(Debug)]
struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            slots: Mutex::new(n),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().expect("keyword gate poisoned");
        while *slots == 0 {
            slots = self.freed.wait(slots).expect("keyword gate poisoned");
        }
        *slots -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.slots.lock().expect("keyword gate poisoned") += 1;
        self.0.freed.notify_one();
    }
}

/// Keyword provider bound to its configuration and idf table.
#[derive(Debug, Clone)]
pub struct KeywordExtractor {
    config: KeywordProviderConfig,
    df: Option<Arc<DocumentFrequency>>,
    stopwords: Arc<Stopwords>,
    agent: ureq::Agent,
    gate: Arc<Gate>,
}

impl KeywordExtractor {
    pub fn new(
        config: KeywordProviderConfig,
        df: Option<DocumentFrequency>,
        stopwords: Stopwords,
    ) -> Result<Self> {
        config.validate()?;
        let agent = ureq::AgentBuilder::new()
            .timeout_connect(config.timeout)
            .timeout(config.timeout)
            .build();
        let gate = Arc::new(Gate::new(config.max_concurrent));
        Ok(KeywordExtractor {
            config,
            df: df.map(Arc::new),
            stopwords: Arc::new(stopwords),
            agent,
            gate,
        })
    }

    /// Offline extractor with the given idf table.
    pub fn offline(k: usize, df: DocumentFrequency, stopwords: Stopwords) -> Result<Self> {
        KeywordExtractor::new(
            KeywordProviderConfig {
                k,
                ..KeywordProviderConfig::default()
            },
            Some(df),
            stopwords,
        )
    }

    pub fn config(&self) -> &KeywordProviderConfig {
        &self.config
    }

    pub fn document_frequency(&self) -> Option<&DocumentFrequency> {
        self.df.as_deref()
    }

    pub fn extract(&self, text: &str) -> Result<BTreeSet<String>> {
        Ok(self.extract_detailed(text)?.terms)
    }

    pub fn extract_detailed(&self, text: &str) -> Result<Keywords> {
        match self.config.mode {
            KeywordMode::OfflineTfIdf => Ok(Keywords {
                terms: self.offline_terms(text)?,
                source: KeywordSource::Offline,
            }),
            KeywordMode::RemoteService => match self.remote_terms(text) {
                Ok(terms) => Ok(Keywords {
                    terms,
                    source: KeywordSource::Remote,
                }),
                Err(e) if self.config.fallback_to_offline => {
                    log::warn!("keyword service failed ({e}); using offline extractor");
                    Ok(Keywords {
                        terms: self.offline_terms(text)?,
                        source: KeywordSource::OfflineFallback,
                    })
                }
                Err(e) => Err(e),
            },
        }
    }

    /// Top-k tokens by tf·idf, ties broken lexicographically.
    pub fn offline_terms(&self, text: &str) -> Result<BTreeSet<String>> {
        let df = self.df.as_deref().ok_or_else(|| {
            Error::InvalidArgument("offline keywords need a document-frequency table".into())
        })?;
        let mut tf: HashMap<&str, usize> = HashMap::new();
        let seq = tokenize(text);
        for t in seq.tokens() {
            if !self.stopwords.contains(t) {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut scored: Vec<(f64, &str)> = tf.into_iter().map(|(t, c)| (c as f64 * df.idf(t), t)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        Ok(scored
            .into_iter()
            .take(self.config.k)
            .map(|(_, t)| t.to_string())
            .collect())
    }

    fn remote_terms(&self, text: &str) -> Result<BTreeSet<String>> {
        let endpoint = self.config.endpoint.as_deref().unwrap_or_default();
        let _slot = self.gate.acquire();
        let mut last_err = None;
        for attempt in 0..=RETRIES {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
            }
            match self.post_once(endpoint, text) {
                Ok(terms) => return Ok(terms),
                Err(e) => {
                    log::debug!("keyword request attempt {} failed: {e}", attempt + 1);
                    last_err = Some(e);
                }
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Remote("no attempt made".into())))
    }

    fn post_once(&self, endpoint: &str, text: &str) -> Result<BTreeSet<String>> {
        let response = self
            .agent
            .post(endpoint)
            .set("Content-Type", "text/plain; charset=utf-8")
            .send_string(text)
            .map_err(|e| Error::Remote(e.to_string()))?;
        if response.status() != 200 {
            return Err(Error::Remote(format!("HTTP {}", response.status())));
        }
        let body = response.into_string().map_err(|e| Error::Remote(e.to_string()))?;
        let terms: Vec<String> = serde_json::from_str(&body)
            .map_err(|e| Error::Remote(format!("expected a JSON array of strings: {e}")))?;
        Ok(terms
            .into_iter()
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .take(self.config.k)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tf_dominates_under_uniform_idf() {
        let kw = KeywordExtractor::offline(2, DocumentFrequency::uniform(), Stopwords::default()).unwrap();
        let terms = kw.extract("marijuana marijuana kfc the the the").unwrap();
        assert_eq!(
            terms,
            ["kfc", "marijuana"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn ties_break_lexicographically() {
        let kw = KeywordExtractor::offline(2, DocumentFrequency::uniform(), Stopwords::default()).unwrap();
        let terms = kw.extract("zebra apple mango").unwrap();
        assert_eq!(terms, ["apple", "mango"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn idf_prefers_rare_tokens() {
        let sw = Stopwords::default();
        let df = DocumentFrequency::build(["common rare", "common", "common"], &sw);
        assert!(df.idf("rare") > df.idf("common"));
        let kw = KeywordExtractor::offline(1, df, sw).unwrap();
        assert_eq!(
            kw.extract("common rare").unwrap().into_iter().next().unwrap(),
            "rare"
        );
    }

    #[test]
    fn missing_df_is_an_error() {
        let kw = KeywordExtractor::new(KeywordProviderConfig::default(), None, Stopwords::default()).unwrap();
        assert!(kw.extract("anything").is_err());
    }

    #[test]
    fn remote_requires_valid_endpoint() {
        let mut cfg = KeywordProviderConfig {
            mode: KeywordMode::RemoteService,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("not a url".into());
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("ftp://example.org/x".into());
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("http://127.0.0.1:9/keywords".into());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn df_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("df.tsv");
        let df = DocumentFrequency::build(["a hoax story", "story time"], &Stopwords::default());
        df.write(&path).unwrap();
        assert_eq!(DocumentFrequency::load(&path).unwrap(), df);
    }
}
