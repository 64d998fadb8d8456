#!/usr/bin/env python3
"""Freeze an independently computed stage-3 feature vector for one fixed pair.

Sentiment comes from the reference vaderSentiment analyzer, stems from nltk's
original Porter algorithm, category and refuting lists from the bundled data
files. The pair uses plain words so whitespace splitting plus punctuation
stripping tokenizes it exactly. Writes crates/core/data/fixtures/stage3_golden.tsv.
Run from the repository root.
"""
from nltk.stem.porter import PorterStemmer
from vaderSentiment.vaderSentiment import SentimentIntensityAnalyzer

CLAIM = "Apple confirms a wonderful new phone"
BODY = (
    "The report is a hoax. Apple did not announce anything! "
    "Analysts doubt the research because the data is fake. "
    "Fans are angry and sad, but some are happy."
)
PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"


def stems(text, porter):
    out = []
    for raw in text.split():
        t = raw.strip(PUNCT).lower()
        if t:
            out.append(porter.stem(t))
    return out


def categories(path):
    cats, cur = [], None
    for line in open(path, encoding="utf-8"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            cur = (line[1:-1], set())
            cats.append(cur)
        else:
            cur[1].add(line.lower())
    return cats


def main():
    porter = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    vader = SentimentIntensityAnalyzer()
    body_stems = stems(BODY, porter)
    vec = []
    for text in (CLAIM, BODY):
        s = vader.polarity_scores(text)
        vec += [s["pos"], s["neg"], s["neu"], s["compound"]]
    names = [
        "analytical_thinking", "clout", "authentic", "emotional_tone", "conjugation", "negation", "comparison", "affective_processes", "positive_emotion", "negative_emotion", "anxiety", "anger", "sadness", "differentiation", "affiliation", "achieve",
    ]
    cats = dict(categories("crates/core/data/categories.txt"))
    for name in names:
        vec.append(sum(1 for s in body_stems if s in cats[name]) / len(body_stems))
    refuting = []
    for line in open("crates/core/data/refuting_words.txt", encoding="utf-8"):
        w = line.strip().lower()
        if w and not w.startswith("#") and w not in refuting:
            refuting.append(w)
    present = set(body_stems)
    vec += [1.0 if porter.stem(w) in present else 0.0 for w in refuting]
    with open("crates/core/data/fixtures/stage3_golden.tsv", "w", encoding="utf-8") as f:
        f.write(f"claim\t{CLAIM}\nbody\t{BODY}\n")
        for v in vec:
            f.write(f"{v!r}\n")


if __name__ == "__main__":
    main()
