"""Labeled tweet datasets on 2-, 3- and 5-point sentiment scales.

Files are UTF-8 TSV, one tweet per line::

    id<TAB>label<TAB>text
    id<TAB>topic<TAB>label<TAB>text      (topic-bearing subtasks)

Lines starting with ``#`` and blank lines are skipped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class Scale(enum.Enum):
    TWO = 2
    THREE = 3
    FIVE = 5

    @property
    def classes(self) -> tuple[str, ...]:
        return _CLASSES[self]

    @property
    def size(self) -> int:
        return self.value

    @property
    def ordinal_values(self) -> np.ndarray:
        """Integer coding of the classes, ascending sentiment."""
        if self is Scale.TWO:
            return np.array([0, 1])
        half = self.value // 2
        return np.arange(-half, half + 1)

    @property
    def positive(self) -> int:
        return self.value - 1

    @property
    def negative(self) -> int:
        return 0

    @classmethod
    def from_points(cls, points: int | str) -> "Scale":
        try:
            return cls(int(points))
        except ValueError:
            raise DataError(f"scale must be one of 2, 3, 5 (got {points!r})") from None

    def parse_label(self, token: str) -> int:
        key = token.strip()
        if self is not Scale.FIVE:
            key = key.lower()
        try:
            return self.classes.index(key)
        except ValueError:
            raise DataError(f"unknown label {token!r} for {self.value}-point scale") from None

    def label_name(self, index: int) -> str:
        return self.classes[index]


_CLASSES = {
    Scale.TWO: ("negative", "positive"),
    Scale.THREE: ("negative", "neutral", "positive"),
    Scale.FIVE: ("-2", "-1", "0", "1", "2"),
}


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    label: int | None = None
    topic: str | None = None


@dataclass(frozen=True)
class Dataset:
    scale: Scale
    tweets: tuple[Tweet, ...] = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tweets", tuple(self.tweets))
        seen = set()
        for t in self.tweets:
            if t.id in seen:
                raise DataError(f"duplicate tweet id {t.id!r} in dataset {self.name!r}")
            seen.add(t.id)
            if t.label is not None and not 0 <= t.label < self.scale.size:
                raise DataError(f"tweet {t.id!r}: label {t.label} outside {self.scale.value}-point scale")
            if not t.text.strip():
                raise DataError(f"tweet {t.id!r}: empty text")

    def __len__(self):
        return len(self.tweets)

    def __iter__(self):
        return iter(self.tweets)

    @property
    def labels(self) -> list[int]:
        return [t.label for t in self.tweets]


def _lines(source: str | Iterable[str]) -> Iterable[str]:
    if isinstance(source, str):
        return source.split("\n")
    return source


def parse_dataset(source: str | Iterable[str], scale: Scale, has_topic: bool = False,
                  name: str = "") -> Dataset:
    ncols = 4 if has_topic else 3
    tweets = []
    seen = set()
    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != ncols:
            raise DataError(f"line {lineno}: expected {ncols} tab-separated columns, got {len(cols)}")
        if has_topic:
            tid, topic, label, text = cols
        else:
            (tid, label, text), topic = cols, None
        try:
            idx = scale.parse_label(label)
        except DataError as e:
            raise DataError(f"line {lineno}: {e}") from None
        if tid in seen:
            raise DataError(f"line {lineno}: duplicate id {tid!r}")
        if not text.strip():
            raise DataError(f"line {lineno}: empty text")
        seen.add(tid)
        tweets.append(Tweet(id=tid, text=text, label=idx, topic=topic))
    return Dataset(scale=scale, tweets=tuple(tweets), name=name)


def read_dataset(path: str | Path, scale: Scale, has_topic: bool = False) -> Dataset:
    path = Path(path)
    with open(path, encoding="utf-8", newline="\n") as fh:
        return parse_dataset(fh, scale, has_topic, name=path.stem)


def serialize_dataset(d: Dataset, has_topic: bool = False) -> str:
    out = []
    for t in d.tweets:
        if t.label is None:
            raise DataError(f"cannot serialize unlabeled tweet {t.id!r}")
        cols = [t.id]
        if has_topic:
            if t.topic is None:
                raise DataError(f"tweet {t.id!r} has no topic")
            cols.append(t.topic)
        cols += [d.scale.label_name(t.label), t.text]
        out.append("\t".join(cols) + "\n")
    return "".join(out)


def merge(a: Dataset, b: Dataset, namespace: bool = False, name: str | None = None) -> Dataset:
    """Concatenate two datasets on the same scale, ``a`` first.

    With ``namespace=True`` ids are prefixed ``<dataset name>:`` so that
    sets distributed with overlapping ids can be combined.
    """
    if a.scale is not b.scale:
        raise DataError(f"scale mismatch: {a.scale.value}-point vs {b.scale.value}-point")

    def ids(d):
        if not namespace:
            return d.tweets
        return tuple(replace(t, id=f"{d.name}:{t.id}") for t in d.tweets)

    ta, tb = ids(a), ids(b)
    clash = {t.id for t in ta} & {t.id for t in tb}
    if clash:
        raise DataError(f"id collision while merging: {sorted(clash)[:5]}")
    return Dataset(scale=a.scale, tweets=ta + tb, name=a.name if name is None else name)


def label_counts(d: Dataset) -> np.ndarray:
    counts = np.zeros(d.scale.size, dtype=np.int64)
    for t in d.tweets:
        if t.label is None:
            raise DataError(f"tweet {t.id!r} is unlabeled")
        counts[t.label] += 1
    return counts


def group_by_topic(tweets: Sequence[Tweet]) -> dict[str, list[Tweet]]:
    groups: dict[str, list[Tweet]] = {}
    for t in tweets:
        if t.topic is None:
            raise DataError(f"tweet {t.id!r} has no topic")
        groups.setdefault(t.topic, []).append(t)
    return groups
