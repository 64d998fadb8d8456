#!/usr/bin/env python3
"""Freeze reference sentiment scores for 200 news-style sentences.

Requires the `vaderSentiment` package (pip install vaderSentiment).
Writes crates/core/data/fixtures/sentiment_golden.tsv with columns
sentence, pos, neg, neu, compound. Run from the repository root.
"""
import random

from vaderSentiment.vaderSentiment import SentimentIntensityAnalyzer

OUT = "crates/core/data/fixtures/sentiment_golden.tsv"

HANDWRITTEN = [
    "KFC restaurants in Colorado will start selling marijuana.",
    "The story is a complete hoax and nobody should believe it.",
    "Officials confirmed the report was accurate.",
    "A spokesperson denied the claims, calling them absurd.",
    "The company is thrilled with the success of the launch!",
    "Residents were terrified after the explosion shook the town.",
    "Police said the man was not injured in the crash.",
    "This is not a good day for the government.",
    "The video is fake, experts warn.",
    "Experts say the photo is genuine but the caption is misleading.",
    "It is unclear whether the attack was planned.",
    "The minister was furious about the leak.",
    "Fans celebrated the victory late into the night.",
    "The tragic accident killed three people on Sunday.",
    "Doctors are hopeful the patient will make a full recovery.",
    "The rumor is totally false and deeply offensive.",
    "Nobody was hurt, thankfully.",
    "The hospital said the surgery went very well.",
    "Critics slammed the decision as reckless and dangerous.",
    "The report has not been verified.",
    "ISIS militants captured a drone, according to the video.",
    "The satellite launch was a huge success for the country.",
    "Authorities warned the public to stay calm.",
    "Banksy was NOT arrested, his publicist said.",
    "The claim is ridiculous!!",
    "Is this story real?",
    "Could this really be true??",
    "What a wonderful surprise for the family!",
    "The scam cost victims millions of dollars.",
    "Investigators found no evidence of wrongdoing.",
    "The zoo denied that any animal was harmed.",
    "Locals say the crab is harmless but huge.",
    "The announcement was met with anger and disbelief.",
    "Sadly, the dog did not survive.",
    "The tourist was lucky to escape with minor injuries.",
    "Scientists are skeptical about the findings.",
    "The website retracted the article after complaints.",
    "Her friends praised her courage and honesty.",
    "The protest remained peaceful throughout the afternoon.",
    "There is absolutely no truth to these reports.",
    "The leader appeared healthy and relaxed at the event.",
    "The government refused to comment on the allegations.",
    "Many readers found the story hilarious.",
    "The fire destroyed the historic building.",
    "He said the photos were doctored and the whole thing was a prank.",
    "The crash was not the driver's fault.",
    "Officials are worried about the spread of the virus.",
    "The new phone is beautiful, but it is too expensive.",
    "Experts call the plan brilliant.",
    "The prisoners escaped through a tunnel.",
    "The bank was robbed twice in one week.",
    "Nobody knows who painted the mural.",
    "The mayor apologized for the confusion.",
    "The rescue team worked tirelessly to free the trapped miners.",
    "Critics say the movie is boring and far too long.",
    "The deal is a win for both companies.",
    "The actor denies having any affair.",
    "The experiment failed miserably.",
    "Visitors love the new exhibition.",
    "The threat was taken very seriously by police.",
    "The woman was arrested for fraud.",
    "No one believes the official explanation anymore.",
    "The company hardly made any profit this year.",
    "The team barely won the match.",
    "The singer is kind of annoyed by the rumours.",
    "This is the worst scandal in decades.",
    "The results are somewhat disappointing.",
    "The charity helped thousands of families.",
    "The attack was condemned by world leaders.",
    "The president said he was extremely proud of the troops.",
]

SUBJECTS = ["The report", "The company", "The spokesperson", "The video", "The minister", "The police",
            "The article", "The witness", "The claim", "The study", "The doctor", "The mayor"]
VERBS = ["is", "was", "seems", "looks", "remains", "appears"]
ADJS = ["good", "bad", "great", "terrible", "false", "accurate", "wrong", "happy", "sad", "dangerous",
        "safe", "honest", "fake", "excellent", "awful", "fine", "strong", "weak", "hopeful", "angry",
        "reliable", "misleading", "brilliant", "stupid", "helpful", "hostile", "calm", "shocking"]
BOOST = ["", "", "very ", "extremely ", "really ", "slightly ", "somewhat ", "totally ", "barely "]
NEG = ["", "", "", "not ", "never ", "hardly "]
TAILS = [".", ".", ".", "!", "!!", "?", "??"]
CONTRAST = ["", "", "", " but the reaction was {adj2}", " but critics called it {adj2}"]


def templated(rng):
    subj = rng.choice(SUBJECTS)
    verb = rng.choice(VERBS)
    adj = rng.choice(ADJS)
    if rng.random() < 0.12:
        adj = adj.upper()
    tail = rng.choice(CONTRAST).format(adj2=rng.choice(ADJS))
    return f"{subj} {verb} {rng.choice(NEG)}{rng.choice(BOOST)}{adj}{tail}{rng.choice(TAILS)}"


def main():
    rng = random.Random(42)
    sentences = list(HANDWRITTEN)
    seen = set(sentences)
    while len(sentences) < 200:
        s = templated(rng)
        if s not in seen:
            seen.add(s)
            sentences.append(s)
    analyzer = SentimentIntensityAnalyzer()
    with open(OUT, "w") as f:
        f.write("sentence\tpos\tneg\tneu\tcompound\n")
        for s in sentences:
            r = analyzer.polarity_scores(s)
            f.write(f"{s}\t{r['pos']}\t{r['neg']}\t{r['neu']}\t{r['compound']}\n")
    print(len(sentences))


if __name__ == "__main__":
    main()
