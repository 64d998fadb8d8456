//! Deterministic text normalization: tokens, sentences, stems, grams,
//! proper nouns and keywords.
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use crate::error::{Error, Result};

pub mod keywords;
mod porter;

pub use keywords::{
    DocumentFrequency, KeywordExtractor, KeywordMode, KeywordProviderConfig, KeywordSource, Keywords,
};
pub use porter::stem;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Lowercased tokens alongside their original surface forms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<String>,
    original_forms: Vec<String>,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn original_forms(&self) -> &[String] {
        &self.original_forms
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn truncated(&self, n: usize) -> TokenSeq {
        TokenSeq {
            tokens: self.tokens.iter().take(n).cloned().collect(),
            original_forms: self.original_forms.iter().take(n).cloned().collect(),
        }
    }

    pub fn stems(&self) -> Vec<String> {
        self.tokens.iter().map(|t| stem(t)).collect()
    }
}

fn trim_token(raw: &str) -> &str {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Splits on whitespace and strips leading/trailing punctuation; internal
/// apostrophes and hyphens survive.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut seq = TokenSeq::default();
    for raw in text.split_whitespace() {
        let t = trim_token(raw);
        if !t.is_empty() {
            seq.tokens.push(t.to_lowercase());
            seq.original_forms.push(t.to_string());
        }
    }
    seq
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "inc", "ltd", "co", "corp", "gen",
    "gov", "sen", "rep", "lt", "col", "sgt", "capt", "cmdr", "rev", "no", "fig", "approx", "dept", "est",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "u.n",
    "e.g", "i.e", "a.m", "p.m",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .trim_end_matches('.');
    if w.is_empty() {
        return false;
    }
    // single-letter initials ("J. K. Rowling")
    if w.chars().count() == 1 && w.chars().all(char::is_uppercase) {
        return true;
    }
    let w = w.to_lowercase();
    ABBREVIATIONS.contains(&w.as_str())
}

/// Splits text into sentences at `.`, `!` or `?` followed by whitespace or the
/// end of input. A period closing a known abbreviation or an initial does not
/// end a sentence.
pub fn sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            // absorb runs like "?!" or "..." and closing quotes/brackets
            let mut j = i + 1;
            while j < chars.len()
                && matches!(
                    chars[j].1,
                    '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}'
                )
            {
                j += 1;
            }
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            if at_boundary {
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                let guarded = c == '.' && j == i + 1 && {
                    let head = &text[start..chars[i].0 + 1];
                    head.split_whitespace().last().is_some_and(is_abbreviation)
                };
                if !guarded {
                    let s = text[start..end].trim();
                    if !s.is_empty() {
                        out.push(s.to_string());
                    }
                    start = end;
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

/// The first `n` sentences joined by single spaces.
pub fn leading_sentences(text: &str, n: usize) -> String {
    sentences(text).into_iter().take(n).collect::<Vec<_>>().join(" ")
}

/// Counted bag of items with deterministic iteration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiset<T: Ord> {
    counts: BTreeMap<T, usize>,
    total: usize,
}

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Multiset {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<T: Ord> Multiset<T> {
    pub fn insert(&mut self, item: T) {
        *self.counts.entry(item).or_insert(0) += 1;
        self.total += 1;
    }

    /// Cardinality counting multiplicity.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, item: &T) -> usize {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, usize)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// Size of the multiset intersection, `sum(min(a[x], b[x]))`.
    pub fn intersection_size(&self, other: &Multiset<T>) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.counts.iter().map(|(k, &v)| v.min(large.count(k))).sum()
    }
}

impl<T: Ord> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Multiset::default();
        for item in iter {
            m.insert(item);
        }
        m
    }
}

/// Word n-grams, `len - n + 1` of them (or none).
pub fn word_ngrams(tokens: &[String], n: usize) -> Result<Multiset<Vec<String>>> {
    if n < 1 {
        return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
    }
    Ok(tokens.windows(n).map(|w| w.to_vec()).collect())
}

/// Lowercases and collapses whitespace runs to single spaces.
pub fn normalize_chars(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Character n-grams over the lowercased, whitespace-collapsed text.
pub fn char_ngrams(text: &str, n: usize) -> Result<Multiset<String>> {
    if n < 1 {
        return Err(Error::InvalidArgument("chargram order must be >= 1".into()));
    }
    let chars: Vec<char> = normalize_chars(text).chars().collect();
    Ok(chars.windows(n).map(|w| w.iter().collect()).collect())
}

/// Fixed stopword list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn parse(text: &str) -> Stopwords {
        Stopwords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Stopwords> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Stopwords::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::parse(DEFAULT_STOPWORDS)
    }
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn is_acronym(s: &str) -> bool {
    let letters: Vec<char> = s.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

/// Capitalization-based proper-noun tagger, lowercased output.
///
/// Capitalized tokens count unless they open a sentence; a sentence-initial
/// token counts when it is an acronym or appears capitalized elsewhere.
pub fn proper_nouns(text: &str, stopwords: &Stopwords) -> BTreeSet<String> {
    let mut inner = BTreeSet::new();
    let mut initial = Vec::new();
    for sentence in sentences(text) {
        let seq = tokenize(&sentence);
        for (i, (form, lower)) in seq.original_forms().iter().zip(seq.tokens()).enumerate() {
            if !starts_upper(form) || stopwords.contains(lower) {
                continue;
            }
            if i == 0 {
                initial.push((lower.clone(), is_acronym(form)));
            } else {
                inner.insert(lower.clone());
            }
        }
    }
    let mut out = inner.clone();
    for (lower, acronym) in initial {
        if acronym || inner.contains(&lower) {
            out.insert(lower);
        }
    }
    out
}
