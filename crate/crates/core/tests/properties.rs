mod common;

use common::*;
use proptest::prelude::*;
use stance_core::embeddings::{cosine, EmbeddingTable};
use stance_core::features::{stage1_features, STAGE1_SLOTS};
use stance_core::sentiment::{compound, SentimentLexicon};
use stance_core::textproc::keywords::{DocumentFrequency, KeywordExtractor};
use stance_core::textproc::{sentences, tokenize, word_ngrams};

fn mini_words() -> Vec<String> {
    let (_, res) = trained_mini();
    res.resources.embeddings.words().to_vec()
}

fn phrase(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(mini_words()), 1..max).prop_map(|w| w.join(" "))
}

fn slot(name: &str) -> usize {
    STAGE1_SLOTS.iter().position(|s| *s == name).unwrap()
}

fn extractor() -> KeywordExtractor {
    let (_, res) = trained_mini();
    KeywordExtractor::offline(5, DocumentFrequency::uniform(), res.resources.stopwords.clone()).unwrap()
}

proptest! {
    #[test]
    fn unigram_count_equals_token_count(text in "[A-Za-z ,.'!?-]{0,200}") {
        let seq = tokenize(&text);
        prop_assert_eq!(word_ngrams(seq.tokens(), 1).unwrap().len(), seq.len());
        prop_assert_eq!(tokenize(&text), seq);
    }

    #[test]
    fn sentences_bounded_by_terminators(text in "[a-z .!?\n]{0,200}") {
        let terminators = text.chars().filter(|c| matches!(c, '.' | '!' | '?')).count();
        prop_assert!(sentences(&text).len() <= terminators + 1);
    }

    #[test]
    fn cosine_symmetric_and_scale_invariant(
        uv in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12),
        alpha in 0.01f64..100.0,
    ) {
        let (u, v): (Vec<f64>, Vec<f64>) = uv.into_iter().unzip();
        let c = cosine(&u, &v).unwrap();
        prop_assert_eq!(c, cosine(&v, &u).unwrap());
        let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
        prop_assert!((cosine(&scaled, &v).unwrap() - c).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&c));
    }

    #[test]
    fn average_ignores_token_order(rows in prop::collection::vec(prop::collection::vec(-1.0f32..1.0, 3), 1..8), picks in prop::collection::vec(0usize..8, 0..20), seed in any::<u64>()) {
        let n = rows.len();
        let table = EmbeddingTable::from_rows(3, rows.into_iter().enumerate().map(|(i, r)| (format!("w{i}"), r))).unwrap();
        let tokens: Vec<String> = picks.iter().map(|p| format!("w{}", p % (n + 2))).collect();
        let mut shuffled = tokens.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = table.avg_of(tokens.iter().map(String::as_str));
        let b = table.avg_of(shuffled.iter().map(String::as_str));
        prop_assert_eq!(a.all_oov, b.all_oov);
        for (x, y) in a.vector.iter().zip(&b.vector) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn sentiment_scores_form_a_simplex(text in "[A-Za-z !?.,:)]{0,120}", words in prop::collection::vec(prop::sample::select(vec!["good", "bad", "not", "very", "hate", "love", "but", "GREAT", "kind of", "!"]), 0..12)) {
        let lex = SentimentLexicon::default();
        let full = format!("{text} {}", words.join(" "));
        let s = lex.analyze(&full);
        prop_assert!((s.positive + s.negative + s.neutral - 1.0).abs() <= 1e-6);
        prop_assert!(s.compound > -1.0 && s.compound < 1.0);
        prop_assert_eq!(lex.analyze(&full), s);
    }

    #[test]
    fn compound_is_increasing_and_bounded(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        prop_assume!(a < b);
        prop_assert!(compound(a) < compound(b));
        prop_assert!(compound(a).abs() < 1.0 && compound(b).abs() < 1.0);
    }

    #[test]
    fn self_pair_maximizes_overlaps(t in phrase(12), other in phrase(40)) {
        let (_, res) = trained_mini();
        let kw = extractor();
        let same = stage1_features(&t, &t, &res.resources, &kw).unwrap();
        let mixed = stage1_features(&t, &other, &res.resources, &kw).unwrap();
        for (i, name) in STAGE1_SLOTS.iter().enumerate() {
            prop_assert!(same.values[i] >= mixed.values[i] - 1e-9, "{name}: {} < {}", same.values[i], mixed.values[i]);
        }
        prop_assert!((same.values[slot("max_sentence_similarity")] - 1.0).abs() < 1e-9);
        prop_assert!((same.values[slot("embedding_similarity")] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn appending_claim_bigram_never_lowers_bigram_slot(claim in phrase(10), body in phrase(40), at in any::<prop::sample::Index>()) {
        let (_, res) = trained_mini();
        let kw = extractor();
        let words: Vec<&str> = claim.split(' ').collect();
        prop_assume!(words.len() >= 2);
        let i = at.index(words.len() - 1);
        let extended = format!("{body}. Then {} {} again.", words[i], words[i + 1]);
        let before = stage1_features(&claim, &body, &res.resources, &kw).unwrap();
        let after = stage1_features(&claim, &extended, &res.resources, &kw).unwrap();
        let s = slot("word_bigram_match");
        prop_assert!(after.values[s] >= before.values[s]);
    }
}
