#!/usr/bin/env python3
"""Freeze reference Porter stems (original algorithm) for a word list.

Requires nltk. Writes crates/core/data/fixtures/porter_golden.tsv.
Run from the repository root.
"""
import re

from nltk.stem.porter import PorterStemmer

SRC = [
    "crates/core/data/fixtures/mini_train_bodies.csv",
    "crates/core/data/fixtures/sentiment_golden.tsv",
    "crates/core/data/sentiment_lexicon.tsv",
]
EXTRA = """caresses ponies ties caress cats feed agreed plastered bled motoring sing conflated troubled sized
hopping tanned falling hissing fizzed failing filing happy sky relational conditional rational valenci hesitanci
digitizer conformabli radicalli differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate formative formalize
electriciti electrical hopeful goodness revival allowance inference airliner gyroscopic adjustable defensible
irritant replacement adjustment dependent adoption homologou communism activate angulariti homologous effective
bowdlerize probate rate cease controll roll generalizations oscillators restaurants selling a is as sky news
""".split()


def main():
    p = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    words = list(EXTRA)
    seen = set(words)
    for path in SRC:
        text = open(path, encoding="utf-8").read().lower()
        for w in re.findall(r"[a-z]+", text):
            if w not in seen:
                seen.add(w)
                words.append(w)
    with open("crates/core/data/fixtures/porter_golden.tsv", "w") as f:
        for w in words:
            f.write(f"{w}\t{p.stem(w)}\n")
    print(len(words))


if __name__ == "__main__":
    main()
