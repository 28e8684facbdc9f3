"""Topic-level sentiment prevalence by classify-and-count."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .corpus import DataError, Dataset, Scale, Tweet, group_by_topic
from .metrics import SentimentDistribution, absolute_error, emd, kld, relative_absolute_error


class Classifier(Protocol):
    scale: Scale

    def predict(self, tweets: Sequence[Tweet]) -> list[int]: ...


@dataclass(frozen=True)
class TopicGroup:
    topic: str
    tweets: tuple[Tweet, ...]

    def __post_init__(self):
        object.__setattr__(self, "tweets", tuple(self.tweets))
        if not self.tweets:
            raise DataError(f"topic {self.topic!r} has no tweets")
        for t in self.tweets:
            if t.topic != self.topic:
                raise DataError(f"tweet {t.id!r} belongs to topic {t.topic!r}, not {self.topic!r}")


def topic_groups(d: Dataset) -> list[TopicGroup]:
    return [TopicGroup(topic, tweets) for topic, tweets in group_by_topic(d.tweets).items()]


def gold_distribution(group: TopicGroup, scale: Scale) -> SentimentDistribution:
    labels = [t.label for t in group.tweets]
    if any(lab is None for lab in labels):
        raise DataError(f"topic {group.topic!r} contains unlabeled tweets")
    return SentimentDistribution.from_labels(labels, scale)


def classify_and_count(groups: Iterable[TopicGroup], model: Classifier,
                       scale: Scale | None = None) -> dict[str, SentimentDistribution]:
    """Fraction of each topic's tweets the model assigns to each class."""
    scale = model.scale if scale is None else scale
    if model.scale is not scale:
        raise DataError(f"model predicts a {model.scale.value}-point scale, data is {scale.value}-point")
    out = {}
    for g in groups:
        if not g.tweets:
            raise DataError(f"topic {g.topic!r} has no tweets")
        out[g.topic] = SentimentDistribution.from_labels(model.predict(g.tweets), scale)
    return out


_METRICS = {
    "KLD": lambda p, q, n: kld(p, q, n),
    "AE": lambda p, q, n: absolute_error(p, q),
    "RAE": lambda p, q, n: relative_absolute_error(p, q, n),
    "EMD": lambda p, q, n: emd(p, q),
}


def evaluate_quant(gold: Mapping[str, SentimentDistribution], pred: Mapping[str, SentimentDistribution],
                   metric: str, test_sizes: Mapping[str, float]) -> float:
    """Uniform mean over topics of the per-topic metric."""
    if metric not in _METRICS:
        raise ValueError(f"unknown quantification metric {metric!r}; choose from {sorted(_METRICS)}")
    if set(gold) != set(pred):
        missing, extra = sorted(set(gold) - set(pred)), sorted(set(pred) - set(gold))
        raise DataError(f"topic sets differ: missing predictions {missing}, unexpected {extra}")
    if not gold:
        raise DataError("no topics to evaluate")
    fn = _METRICS[metric]
    return float(np.mean([fn(gold[t], pred[t], test_sizes[t]) for t in gold]))


def format_distributions(dists: Mapping[str, SentimentDistribution]) -> str:
    return "".join(t + "".join(f"\t{v:.6f}" for v in d.p) + "\n" for t, d in dists.items())


def parse_distributions(source: str, scale: Scale) -> dict[str, SentimentDistribution]:
    out = {}
    for lineno, line in enumerate(source.split("\n"), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != scale.size + 1:
            raise DataError(f"line {lineno}: expected topic and {scale.size} probabilities")
        p = np.array([float(x) for x in cols[1:]])
        # six-decimal rounding can leave the sum a few 1e-6 off
        out[cols[0]] = SentimentDistribution(scale, p / p.sum())
    return out


def write_distributions(dists: Mapping[str, SentimentDistribution], path: str | Path) -> None:
    Path(path).write_text(format_distributions(dists), encoding="utf-8")
