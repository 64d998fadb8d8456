#!/usr/bin/env python3
"""Generate the bundled FNC-format mini corpus and a small embedding table.

Output (under crates/core/data/fixtures/):
  mini_train_stances.csv / mini_train_bodies.csv   200 instances
  mini_test_stances.csv  / mini_test_bodies.csv    100 instances
  mini_embeddings.txt                              word2vec text, d=25

The corpus is synthetic: each topic has a headline, bodies are written from
sentence templates whose stance vocabulary depends on the gold label, and
unrelated pairs join a headline with a body from a different topic.
Run from the repository root. Output is deterministic.
"""
import csv
import random
import string

SEED = 20180614
DIM = 25
OUT = "crates/core/data/fixtures"

TRAIN_TOPICS = [
    ("KFC restaurants in Colorado will start selling marijuana",
     ["KFC", "Colorado", "restaurants", "marijuana", "selling", "chicken"]),
    ("Florida woman underwent surgery to add a third breast",
     ["Florida", "woman", "surgery", "third", "breast", "implant"]),
    ("Apple will launch a gold iPhone made from recycled watches",
     ["Apple", "iPhone", "gold", "recycled", "watches", "launch"]),
    ("Giant crab photographed off the coast of Whitstable",
     ["crab", "Whitstable", "coast", "photographed", "giant", "harbour"]),
    ("ISIS militants captured a drone operated by Pentagon contractors",
     ["ISIS", "militants", "drone", "Pentagon", "contractors", "captured"]),
    ("Banksy arrested in London and identity revealed",
     ["Banksy", "arrested", "London", "identity", "revealed", "artist"]),
    ("Spider burrowed under skin of tourist in Bali",
     ["spider", "burrowed", "skin", "tourist", "Bali", "doctors"]),
    ("Nicaragua launches its own satellite with Russian help",
     ["Nicaragua", "satellite", "Russian", "launches", "orbit", "rocket"]),
    ("Man spent Christmas trapped inside an ATM in Texas",
     ["ATM", "Christmas", "trapped", "Texas", "bank", "machine"]),
    ("North Korean leader Kim Jong Un undergoes ankle surgery",
     ["Kim", "Jong", "Un", "Korean", "ankle", "surgery"]),
    ("Vatican confirms Pope Francis will visit Mars colony plans",
     ["Vatican", "Pope", "Francis", "Mars", "colony", "visit"]),
    ("Zookeeper fed a goat to a tiger in Shanghai",
     ["zookeeper", "goat", "tiger", "Shanghai", "zoo", "fed"]),
]

TEST_TOPICS = [
    ("Netflix will pay viewers to binge watch new series",
     ["Netflix", "viewers", "binge", "series", "pay", "streaming"]),
    ("Meteorite crashed into a Managua airport runway",
     ["meteorite", "Managua", "airport", "runway", "crashed", "crater"]),
    ("Google buys an island in the Pacific for a data center",
     ["Google", "island", "Pacific", "data", "center", "buys"]),
    ("Tesla cars can now drive across Canada with no driver",
     ["Tesla", "cars", "Canada", "driver", "drive", "autopilot"]),
    ("Scientists clone a woolly mammoth in Siberia",
     ["scientists", "clone", "woolly", "mammoth", "Siberia", "laboratory"]),
    ("Penguin walks into a Sydney cafe and orders fish",
     ["penguin", "Sydney", "cafe", "fish", "orders", "walks"]),
]

AGREE = [
    "Officials confirmed that the {a} story is true.",
    "A spokesperson said the report about the {b} was accurate and verified.",
    "Witnesses confirmed they saw the {a} with their own eyes.",
    "The company announced the {b} news in an official statement on Monday.",
    "Police verified the account and said the {a} event really happened.",
    "Records obtained by reporters prove the {b} claim is genuine.",
    "Experts agree the {a} photographs are authentic.",
    "The announcement was confirmed by several independent sources.",
]
DISAGREE = [
    "The {a} story is a hoax, officials said.",
    "A spokesperson denied the report about the {b} and called it fake.",
    "Experts say the {a} claim is false and the photographs are bogus.",
    "Fact checkers debunked the {b} rumour on Tuesday.",
    "The company denies any {a} plan and says the story is a fraud.",
    "Sources doubt the {b} account and the website has retracted it.",
    "Investigators found no evidence and called the {a} report fabricated.",
    "It was a prank and nothing about the {b} was real.",
]
DISCUSS = [
    "Reports suggest the {a} may be involved, but this could not be verified.",
    "It remains unclear whether the {b} story is accurate.",
    "The {a} account was first reported on social media, according to local outlets.",
    "Several websites are sharing claims about the {b} this week.",
    "Reporters contacted the company about the {a} but received no comment.",
    "The {b} story has been circulating online for several days.",
    "Allegedly the {a} was seen by residents, although details are scarce.",
    "Local media described the {b} reports without further confirmation.",
]
FILLER = [
    "The weather was mild across the region on the day of the report.",
    "Readers shared the article thousands of times within hours.",
    "The newspaper published a follow up piece later in the week.",
    "Several people commented on the story on the website.",
    "The article included a photograph and a short video clip.",
    "Traffic in the city centre was heavy during the afternoon.",
    "The original post has since been viewed more than a million times.",
    "A local radio station also covered the story on Wednesday.",
]

AGREE_WORDS = "confirmed true accurate verified witnesses announced official statement proves genuine authentic agree".split()
REFUTE_WORDS = "hoax denied fake false bogus debunked denies fraud doubt retracted fabricated prank".split()
HEDGE_WORDS = "reports suggest unclear allegedly circulating reportedly claims comment scarce confirmation".split()


def make_body(rng, topic_words, label):
    a, b = rng.sample([w for w in topic_words], 2)
    lead = "{} {} reports spread about the {} and the {}.".format(
        topic_words[0], rng.choice(["news:", "update:", "today:"]), a.lower() if a.islower() else a, b)
    pool = {"agree": AGREE, "disagree": DISAGREE, "discuss": DISCUSS}[label]
    n_stance = rng.randint(2, 3)
    stance = [t.format(a=rng.choice(topic_words), b=rng.choice(topic_words)) for t in rng.sample(pool, n_stance)]
    # a little cross-talk keeps the stages from being trivially separable
    if rng.random() < 0.25:
        other = DISCUSS if label != "discuss" else rng.choice([AGREE, DISAGREE])
        stance.append(rng.choice(other).format(a=rng.choice(topic_words), b=rng.choice(topic_words)))
    filler = rng.sample(FILLER, rng.randint(1, 3))
    sentences = stance + filler
    rng.shuffle(sentences)
    return " ".join([lead] + sentences)


def build(rng, topics, counts, id_offset):
    """counts: dict label -> number of instances for related labels, plus unrelated."""
    bodies = []  # (body_id, topic_index, label, text)
    instances = []
    related = []
    for label in ("discuss", "agree", "disagree"):
        for i in range(counts[label]):
            t = i % len(topics)
            body_id = id_offset + len(bodies)
            bodies.append((body_id, t, label, make_body(rng, topics[t][1], label)))
            related.append((topics[t][0], body_id, label))
    # unrelated: headline from a different topic than the body
    unrelated = []
    used = set()
    while len(unrelated) < counts["unrelated"]:
        body_id, bt, _, _ = rng.choice(bodies)
        ht = rng.randrange(len(topics))
        if ht == bt or (ht, body_id) in used:
            continue
        used.add((ht, body_id))
        unrelated.append((topics[ht][0], body_id, "unrelated"))
    instances = related + unrelated
    rng.shuffle(instances)
    return instances, bodies


def write(prefix, instances, bodies):
    with open(f"{OUT}/{prefix}_stances.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Headline", "Body ID", "Stance"])
        for h, b, s in instances:
            w.writerow([h, b, s])
    with open(f"{OUT}/{prefix}_bodies.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Body ID", "articleBody"])
        for body_id, _, _, text in bodies:
            w.writerow([body_id, text])


def tokens(text):
    out = []
    for raw in text.split():
        t = raw.strip(string.punctuation).lower()
        if t:
            out.append(t)
    return out


def main():
    rng = random.Random(SEED)
    train, train_bodies = build(rng, TRAIN_TOPICS, {"unrelated": 110, "discuss": 40, "agree": 30, "disagree": 20}, 0)
    test, test_bodies = build(rng, TEST_TOPICS, {"unrelated": 55, "discuss": 20, "agree": 15, "disagree": 10}, 1000)
    write("mini_train", train, train_bodies)
    write("mini_test", test, test_bodies)

    vocab = []
    seen = set()
    texts = [h for h, _ in TRAIN_TOPICS + TEST_TOPICS] + [b[3] for b in train_bodies + test_bodies]
    for text in texts:
        for t in tokens(text):
            if t not in seen:
                seen.add(t)
                vocab.append(t)
    groups = {}
    for name, words in (("agree", AGREE_WORDS), ("refute", REFUTE_WORDS), ("hedge", HEDGE_WORDS)):
        for w in words:
            groups[w] = name
    for i, (_, words) in enumerate(TRAIN_TOPICS + TEST_TOPICS):
        for w in words:
            groups.setdefault(w.lower(), f"topic{i}")
    erng = random.Random(SEED + 1)
    centers = {}
    with open(f"{OUT}/mini_embeddings.txt", "w") as f:
        f.write(f"{len(vocab)} {DIM}\n")
        for w in vocab:
            g = groups.get(w)
            noise = [erng.gauss(0.0, 1.0) for _ in range(DIM)]
            if g is not None:
                if g not in centers:
                    centers[g] = [erng.gauss(0.0, 1.0) for _ in range(DIM)]
                vec = [0.8 * c + 0.4 * n for c, n in zip(centers[g], noise)]
            else:
                vec = noise
            f.write(w + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
    print(f"train={len(train)} test={len(test)} vocab={len(vocab)}")


if __name__ == "__main__":
    main()
