//! Rule-based sentiment intensity scoring over a valence lexicon.
use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const C_INCR: f64 = 0.733;
const N_SCALAR: f64 = -0.74;
const ALPHA: f64 = 15.0;
const EP_STEP: f64 = 0.292;
const EP_MAX: usize = 4;
const QM_STEP: f64 = 0.18;
const QM_MAX: f64 = 0.96;

const DEFAULT_LEXICON: &str = include_str!("../data/sentiment_lexicon.tsv");
const DEFAULT_BOOSTERS: &str = include_str!("../data/boosters.tsv");
const DEFAULT_NEGATORS: &str = include_str!("../data/negators.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
    pub compound: f64,
}

impl SentimentScores {
    pub const NEUTRAL: SentimentScores = SentimentScores {
        positive: 0.0,
        negative: 0.0,
        neutral: 1.0,
        compound: 0.0,
    };

    /// `[positive, negative, neutral, compound]`.
    pub fn to_array(self) -> [f64; 4] {
        [self.positive, self.negative, self.neutral, self.compound]
    }
}

/// Valences, booster increments and negation triggers.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negators: HashSet<String>,
}

fn parse_pairs(text: &str, what: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let token = cols.next().unwrap_or_default().trim();
        let value = cols
            .next()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("{what} line {}: {line:?}", n + 1)))?;
        out.insert(token.to_string(), value);
    }
    Ok(out)
}

fn parse_words(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl SentimentLexicon {
    pub fn parse(lexicon: &str, boosters: &str, negators: &str) -> Result<Self> {
        let valences = parse_pairs(lexicon, "sentiment lexicon")?;
        if let Some((t, v)) = valences.iter().find(|(_, v)| !(-4.0..=4.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "valence of {t:?} out of range: {v}"
            )));
        }
        Ok(SentimentLexicon {
            valences,
            boosters: parse_pairs(boosters, "booster list")?,
            negators: parse_words(negators),
        })
    }

    pub fn load(lexicon: &Path, boosters: &Path, negators: &Path) -> Result<Self> {
        Self::parse(&read(lexicon)?, &read(boosters)?, &read(negators)?)
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    fn in_lexicon(&self, lower: &str) -> bool {
        self.valences.contains_key(lower)
    }

    fn negated(&self, lower: &str) -> bool {
        self.negators.contains(lower) || lower.contains("n't")
    }

    /// Booster contribution of `word` to a neighbour with valence `valence`.
    fn booster(&self, word: &Word, valence: f64, cap_diff: bool) -> f64 {
        let Some(&incr) = self.boosters.get(&word.lower) else {
            return 0.0;
        };
        let mut s = if valence < 0.0 { -incr } else { incr };
        if word.upper && cap_diff {
            s += if valence > 0.0 { C_INCR } else { -C_INCR };
        }
        s
    }

    pub fn analyze(&self, text: &str) -> SentimentScores {
        let words: Vec<Word> = text.split_whitespace().map(Word::new).collect();
        if words.is_empty() {
            return SentimentScores::NEUTRAL;
        }
        let upper = words.iter().filter(|w| w.upper).count();
        let cap_diff = upper > 0 && upper < words.len();

        let mut sentiments = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let lower = words[i].lower.as_str();
            let skip = self.boosters.contains_key(lower)
                || (lower == "kind" && words.get(i + 1).is_some_and(|w| w.lower == "of"));
            sentiments.push(if skip {
                0.0
            } else {
                self.token_valence(&words, i, cap_diff)
            });
        }

        if let Some(bi) = words.iter().position(|w| w.lower == "but") {
            for (si, s) in sentiments.iter_mut().enumerate() {
                if si < bi {
                    *s *= 0.5;
                } else if si > bi {
                    *s *= 1.5;
                }
            }
        }
        self.score(&sentiments, text)
    }

    fn token_valence(&self, words: &[Word], i: usize, cap_diff: bool) -> f64 {
        let w = &words[i];
        let Some(base) = self.valence(&w.lower) else {
            return 0.0;
        };
        let lower = |j: usize| words[j].lower.as_str();
        let mut valence = base;
        if w.lower == "no" && i + 1 < words.len() && self.in_lexicon(lower(i + 1)) {
            valence = 0.0;
        }
        if (i > 0 && lower(i - 1) == "no")
            || (i > 1 && lower(i - 2) == "no")
            || (i > 2 && lower(i - 3) == "no" && matches!(lower(i - 1), "or" | "nor"))
        {
            valence = base * N_SCALAR;
        }
        if w.upper && cap_diff {
            valence += if valence > 0.0 { C_INCR } else { -C_INCR };
        }
        for start in 0..3 {
            if i <= start {
                break;
            }
            let prev = &words[i - start - 1];
            if self.in_lexicon(&prev.lower) {
                continue;
            }
            let mut s = self.booster(prev, valence, cap_diff);
            if start == 1 {
                s *= 0.95;
            } else if start == 2 {
                s *= 0.9;
            }
            valence += s;
            valence = self.negation_check(valence, words, start, i);
            if start == 2 {
                valence = self.booster_phrase_check(valence, words, i);
            }
        }
        self.least_check(valence, words, i)
    }

    fn negation_check(&self, valence: f64, words: &[Word], start: usize, i: usize) -> f64 {
        let lower = |j: usize| words[j].lower.as_str();
        match start {
            0 => {
                if self.negated(lower(i - 1)) {
                    return valence * N_SCALAR;
                }
            }
            1 => {
                if lower(i - 2) == "never" && matches!(lower(i - 1), "so" | "this") {
                    return valence * 1.25;
                } else if lower(i - 2) == "without" && lower(i - 1) == "doubt" {
                    return valence;
                } else if self.negated(lower(i - 2)) {
                    return valence * N_SCALAR;
                }
            }
            _ => {
                if (lower(i - 3) == "never" && matches!(lower(i - 2), "so" | "this"))
                    || matches!(lower(i - 1), "so" | "this")
                {
                    return valence * 1.25;
                } else if lower(i - 3) == "without" && (lower(i - 2) == "doubt" || lower(i - 1) == "doubt") {
                    return valence;
                } else if self.negated(lower(i - 3)) {
                    return valence * N_SCALAR;
                }
            }
        }
        valence
    }

    /// Multi-word boosters ("kind of") in the three preceding tokens.
    fn booster_phrase_check(&self, mut valence: f64, words: &[Word], i: usize) -> f64 {
        let lower = |j: usize| words[j].lower.as_str();
        let phrases = [
            format!("{} {} {}", lower(i - 3), lower(i - 2), lower(i - 1)),
            format!("{} {}", lower(i - 3), lower(i - 2)),
            format!("{} {}", lower(i - 2), lower(i - 1)),
        ];
        for p in &phrases {
            if let Some(b) = self.boosters.get(p) {
                valence += b;
            }
        }
        valence
    }

    fn least_check(&self, valence: f64, words: &[Word], i: usize) -> f64 {
        if i > 0 && words[i - 1].lower == "least" && !self.in_lexicon("least") {
            if i > 1 && matches!(words[i - 2].lower.as_str(), "at" | "very") {
                return valence;
            }
            return valence * N_SCALAR;
        }
        valence
    }

    fn score(&self, sentiments: &[f64], text: &str) -> SentimentScores {
        let ep = text.matches('!').count().min(EP_MAX) as f64 * EP_STEP;
        let qm = match text.matches('?').count() {
            0 | 1 => 0.0,
            n @ 2..=3 => n as f64 * QM_STEP,
            _ => QM_MAX,
        };
        let emphasis = ep + qm;

        let mut sum: f64 = sentiments.iter().sum();
        if sum > 0.0 {
            sum += emphasis;
        } else if sum < 0.0 {
            sum -= emphasis;
        }
        let compound = compound(sum);

        let (mut pos, mut neg, mut neu) = (0.0, 0.0, 0.0);
        for &s in sentiments {
            if s > 0.0 {
                pos += s + 1.0;
            } else if s < 0.0 {
                neg += s - 1.0;
            } else {
                neu += 1.0;
            }
        }
        if pos > neg.abs() {
            pos += emphasis;
        } else if pos < neg.abs() {
            neg -= emphasis;
        }
        let total = pos + neg.abs() + neu;
        SentimentScores {
            positive: (pos / total).abs(),
            negative: (neg / total).abs(),
            neutral: (neu / total).abs(),
            compound,
        }
    }
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        SentimentLexicon::parse(DEFAULT_LEXICON, DEFAULT_BOOSTERS, DEFAULT_NEGATORS)
            .expect("bundled sentiment lexicon is well-formed")
    }
}

/// `s / sqrt(s² + 15)`.
pub fn compound(s: f64) -> f64 {
    (s / (s * s + ALPHA).sqrt()).clamp(-1.0, 1.0)
}

struct Word {
    lower: String,
    upper: bool,
}

impl Word {
    fn new(raw: &str) -> Word {
        // short remainders are kept whole so emoticons survive
        let stripped = raw.trim_matches(|c: char| c.is_ascii_punctuation());
        let token = if stripped.chars().count() <= 2 {
            raw
        } else {
            stripped
        };
        let upper = token.chars().any(char::is_uppercase) && !token.chars().any(char::is_lowercase);
        Word {
            lower: token.to_lowercase(),
            upper,
        }
    }
}
