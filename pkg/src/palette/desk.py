"""Synthetic desk-scale movie-review world.

A small template grammar over a fixed vocabulary produces corpora whose
adjective mix is controlled per corpus. Training n-gram models on them gives
a base model and attribute models with known sentiment trends:

* ``base``: mixed reviews leaning slightly negative, with some insults.
* ``positive`` / ``negative``: strongly one-sided reviews.
* ``clean_negative``: insult-free reviews dominated by calm neutral words
  with a slight negative trend (the overlapping "non-toxic" attribute that
  conflicts with a positive target).
* ``clean_positive``: the same with a slight positive trend.
* ``tone_negative``: plain reviews with some negative sentiment (a third
  attribute for three-way combinations).

Everything is seeded, so the corpora are reproducible byte for byte.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .dist import Vocabulary

NOUNS = ("movie", "film", "plot", "acting", "story", "ending", "cast", "music")
POSITIVE = ("good", "great", "wonderful", "lovely", "brilliant", "enjoyable")
NEGATIVE = ("bad", "awful", "boring", "terrible", "dull", "poor")
NEUTRAL = ("long", "okay", "simple", "quiet", "calm", "fine")
TOXIC = ("stupid", "idiotic", "trash", "garbage")
FUNCTION = ("the", "a", "this", "it", "was", "is", "and", "but", "very", "really", "quite", ".")

VOCAB_TOKENS = FUNCTION + NOUNS + POSITIVE + NEGATIVE + NEUTRAL + TOXIC

# adjective class mix per corpus: (positive, negative, neutral, toxic)
MIXES = {
    "base": (0.25, 0.40, 0.25, 0.10),
    "positive": (0.88, 0.02, 0.10, 0.00),
    "negative": (0.02, 0.88, 0.10, 0.00),
    "clean_negative": (0.08, 0.32, 0.60, 0.00),
    "clean_positive": (0.32, 0.08, 0.60, 0.00),
    # sorts last, so adding it left the seeds of the other corpora unchanged
    "tone_negative": (0.15, 0.45, 0.40, 0.00),
}

TEMPLATES = (
    "the {n} was {a} .",
    "the {n} was {d} {a} .",
    "the {n} was {a} and the {n} was {a} .",
    "the {n} was {a} but the {n} was {a} .",
    "it was a {a} {n} .",
    "this {n} is {d} {a} .",
    "this {n} is {a} and {a} .",
)
DEGREE = ("very", "really", "quite")


def vocabulary() -> Vocabulary:
    return Vocabulary(VOCAB_TOKENS)


def lexicon() -> dict[str, int]:
    """Sentiment polarity of the adjective tokens."""
    return {**{w: 1 for w in POSITIVE}, **{w: -1 for w in NEGATIVE}}


def make_corpus(kind: str, n_reviews: int = 1500, seed: int = 0, sentences_per_review: int = 3) -> list[str]:
    """Reviews (one per line) of several template sentences each."""
    mix = np.asarray(MIXES[kind], dtype=float)
    classes = (POSITIVE, NEGATIVE, NEUTRAL, TOXIC)
    rng = np.random.default_rng([seed, sorted(MIXES).index(kind)])

    def adjective():
        words = classes[rng.choice(4, p=mix / mix.sum())]
        return words[rng.integers(len(words))]

    lines = []
    for _ in range(n_reviews):
        sents = []
        for _ in range(sentences_per_review):
            tpl = TEMPLATES[rng.integers(len(TEMPLATES))]
            out = []
            for piece in tpl.split():
                if piece == "{n}":
                    out.append(NOUNS[rng.integers(len(NOUNS))])
                elif piece == "{a}":
                    out.append(adjective())
                elif piece == "{d}":
                    out.append(DEGREE[rng.integers(len(DEGREE))])
                else:
                    out.append(piece)
            sents.append(" ".join(out))
        lines.append(" ".join(sents))
    return lines


def write_world(directory, n_reviews: int = 1500, seed: int = 0) -> dict[str, Path]:
    """Write ``vocab.txt`` and one corpus file per kind into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"vocab": directory / "vocab.txt"}
    vocabulary().to_file(paths["vocab"])
    for kind in MIXES:
        path = directory / f"{kind}.txt"
        path.write_text("\n".join(make_corpus(kind, n_reviews, seed)) + "\n", encoding="utf-8")
        paths[kind] = path
    return paths


SENTIMENT_PROMPT = ("the", "movie", "was", "bad", "and", "the", "plot", "was")
S_GRID = (0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0)
T_GRID = tuple(round(0.05 * i, 2) for i in range(11))
RATIO_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


def train_models(n_reviews: int = 1500, seed: int = 0, order: int = 3, add_k: float = 1.0) -> dict:
    """One n-gram model per corpus kind."""
    from .providers import train_ngram

    vocab = vocabulary()
    return {kind: train_ngram(make_corpus(kind, n_reviews, seed), vocab, order=order, add_k=add_k)
            for kind in MIXES}


def sentiment_scenario(models: dict, seed: int = 0, generations: int = 50, anti_strength: float = 0.5):
    """Steer a negative review positive: main = positive, anti = negative."""
    from .combine import ANTI, AttributeSpec
    from .decode import SamplerConfig
    from .evaluation import Scenario

    attrs = [AttributeSpec("positive", models["positive"], 1.0),
             AttributeSpec("negative", models["negative"], anti_strength, sign=ANTI)]
    return Scenario(models["base"], attrs, SENTIMENT_PROMPT, SamplerConfig(seed=seed), generations,
                    lexicon(), seed=seed, name="sentiment")


def conflict_scenario(models: dict, same_trend: bool = False, seed: int = 0, generations: int = 50,
                      target_strength: float = 1.0):
    """Insult-free attribute overlapping a positive target.

    The overlapping attribute leans negative (conflict) or, with
    ``same_trend``, positive.
    """
    from .combine import AttributeSpec
    from .decode import SamplerConfig
    from .evaluation import Scenario

    kind = "clean_positive" if same_trend else "clean_negative"
    attrs = [AttributeSpec("clean", models[kind], target_strength),
             AttributeSpec("positive", models["positive"], target_strength)]
    return Scenario(models["base"], attrs, SENTIMENT_PROMPT, SamplerConfig(seed=seed), generations,
                    lexicon(), seed=seed, name="same-trend" if same_trend else "conflict")
