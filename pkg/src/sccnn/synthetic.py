"""Synthetic tweet corpora for smoke tests.

Each tweet carries one sentiment word from a five-level lexicon plus filler,
with optional Twitter decorations (mentions, urls, emoticons, elongation,
caps) so the full preprocessing path is exercised. ``python -m
sccnn.synthetic OUTDIR`` regenerates the bundled mini-corpus.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .corpus import Dataset, Scale, Tweet, serialize_dataset

LEXICON = {
    -2: ["awful", "horrible", "terrible", "disgusting", "worst", "hate"],
    -1: ["bad", "boring", "meh", "disappointing", "annoying", "weak"],
    0: ["okay", "average", "normal", "usual", "standard", "plain"],
    1: ["good", "nice", "fun", "cool", "enjoyed", "pleasant"],
    2: ["amazing", "awesome", "brilliant", "perfect", "love", "fantastic"],
}
FILLER = ["the", "movie", "game", "phone", "was", "is", "really", "just", "this", "my",
          "new", "again", "show", "album", "week", "today", "so", "that", "a", "of"]
TOPICS = ["@acme", "netflix", "iphone", "taylor swift", "#oscars", "playstation"]
PRIORS = {
    Scale.FIVE: {-2: 0.10, -1: 0.20, 0: 0.30, 1: 0.25, 2: 0.15},
    Scale.THREE: {-2: 0.12, -1: 0.18, 0: 0.35, 1: 0.20, 2: 0.15},
    Scale.TWO: {-2: 0.15, -1: 0.20, 1: 0.40, 2: 0.25},
}


def _to_label(level: int, scale: Scale) -> int:
    if scale is Scale.FIVE:
        return level + 2
    if scale is Scale.THREE:
        return int(np.sign(level)) + 1
    return int(level > 0)


def _decorate(words: list[str], level: int, rng: np.random.Generator) -> list[str]:
    if rng.random() < 0.2:
        words.insert(0, "@" + str(rng.choice(["bob", "jane", "acme_support", "x99"])))
    if rng.random() < 0.15:
        words.append("http://t.co/" + "".join(rng.choice(list("abcdefgh123"), 6)))
    if rng.random() < 0.3 and level != 0:
        words.append(str(rng.choice([":)", ":D", "<3"] if level > 0 else [":(", ":-(", ":/"])))
    if rng.random() < 0.15:
        words.append(str(rng.choice(["!!!", "??", "..."])))
    i = int(rng.integers(len(words)))
    if rng.random() < 0.15 and words[i].isalpha():
        words[i] = words[i] + words[i][-1] * 3
    elif rng.random() < 0.1 and words[i].isalpha():
        words[i] = words[i].upper()
    return words


def make_tweet(level: int, rng: np.random.Generator, decorate: bool = True) -> str:
    words = list(rng.choice(FILLER, int(rng.integers(3, 9))))
    words.insert(int(rng.integers(len(words) + 1)), str(rng.choice(LEXICON[level])))
    if decorate:
        words = _decorate(words, level, rng)
    return " ".join(words)


def make_dataset(scale: Scale, size: int, seed: int, noise: float = 0.05, name: str = "",
                 with_topic: bool = True, decorate: bool = True) -> Dataset:
    """``size`` tweets drawn from the scale's class prior; ``noise`` is the
    fraction whose label is replaced by a uniformly random class."""
    rng = np.random.default_rng(seed)
    levels = list(PRIORS[scale])
    probs = np.array(list(PRIORS[scale].values()))
    tweets = []
    for i in range(size):
        level = int(rng.choice(levels, p=probs / probs.sum()))
        label = _to_label(level, scale)
        if rng.random() < noise:
            label = int(rng.integers(scale.size))
        topic = str(rng.choice(TOPICS)) if with_topic else None
        tweets.append(Tweet(f"{name or 'tw'}{i:04d}", make_tweet(level, rng, decorate), label, topic))
    return Dataset(scale, tuple(tweets), name)


def separable_dataset(size: int = 50, seed: int = 0) -> Dataset:
    """Three-class set where each tweet's class is fixed by its one keyword."""
    rng = np.random.default_rng(seed)
    tweets = []
    for i in range(size):
        label = i % 3
        level = (-2, 0, 2)[label]
        tweets.append(Tweet(f"s{i:03d}", make_tweet(level, rng, decorate=False), label))
    return Dataset(Scale.THREE, tuple(tweets), "separable")


def make_embeddings(dim: int, seed: int, coverage: float = 0.7) -> str:
    """GloVe-format vectors for a random ``coverage`` share of the vocabulary.

    The vectors carry no sentiment information; the rest of the vocabulary
    is left out on purpose so that unknown-word initialization runs.
    """
    rng = np.random.default_rng(seed)
    vocab = sorted({w for ws in LEXICON.values() for w in ws} | set(FILLER))
    vocab += ["<user>", "<url>", "<smile>", "<sadface>", "<heart>", "<repeat>", "<elong>",
              "<allcaps>", "<hashtag>", "<number>", "!", "?", "."]
    lines = []
    for w in vocab:
        if rng.random() < coverage:
            v = rng.normal(0.0, 0.3, size=dim)
            lines.append(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")
    return "".join(lines)


def write_mini_corpus(outdir: str | Path, seed: int = 7, dim: int = 16) -> None:
    """200/50/50 train/dev/test splits on each scale plus an embeddings file."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "embeddings.txt").write_text(make_embeddings(dim, seed), encoding="utf-8")
    for scale, sub in [(Scale.TWO, "two"), (Scale.THREE, "three"), (Scale.FIVE, "five")]:
        (out / sub).mkdir(exist_ok=True)
        for j, (split, size) in enumerate([("train", 200), ("dev", 50), ("test", 50)]):
            d = make_dataset(scale, size, seed * 100 + scale.value * 10 + j, name=split)
            (out / sub / f"{split}.tsv").write_text(serialize_dataset(d, has_topic=True), encoding="utf-8")


if __name__ == "__main__":
    write_mini_corpus(sys.argv[1] if len(sys.argv) > 1 else "data/mini")
