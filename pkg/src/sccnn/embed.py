"""Pretrained word vectors, vocabulary growth and fixed-length encoding."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable, Sequence

import numpy as np

from .corpus import DataError

log = logging.getLogger(__name__)

PAD = "<pad>"
OOV_RANGE = 0.25


@dataclass
class EmbeddingTable:
    """Token -> row map over a ``|V| x k`` matrix. Row 0 is the zero pad row."""

    tokens: list[str]
    vectors: np.ndarray
    duplicate_count: int = 0
    token_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.tokens or self.tokens[0] != PAD:
            raise ValueError("row 0 must be the pad token")
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.tokens):
            raise ValueError(f"vectors shape {self.vectors.shape} does not match {len(self.tokens)} tokens")
        self.token_index = {t: i for i, t in enumerate(self.tokens)}
        if len(self.token_index) != len(self.tokens):
            raise ValueError("tokens must be unique")

    pad_index = 0

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.token_index


@dataclass(frozen=True)
class EncodedExample:
    indices: np.ndarray
    true_len: int
    label: int | None = None


def load_embeddings(source: str | Iterable[str], expected_dim: int,
                    keep: Collection[str] | None = None) -> EmbeddingTable:
    """Parse GloVe-format text (``token v1 ... vk`` per line, no header).

    ``keep`` restricts the table to the given tokens, which keeps the
    full pretrained vocabulary out of memory when only a corpus subset is needed.
    Duplicate tokens keep their last vector; the count is stored on the table.
    """
    lines = source.split("\n") if isinstance(source, str) else source
    rows: dict[str, np.ndarray] = {}
    dups = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line:
            continue
        parts = line.split(" ")
        token, values = parts[0], parts[1:]
        if len(values) != expected_dim:
            raise DataError(f"line {lineno}: expected {expected_dim} values for {token!r}, got {len(values)}")
        if token == PAD:
            raise DataError(f"line {lineno}: {PAD!r} is reserved")
        if keep is not None and token not in keep:
            continue
        try:
            vec = np.array(values, dtype=np.float64)
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric value in vector for {token!r}") from None
        if token in rows:
            dups += 1
            del rows[token]  # last wins, and takes the last position
        rows[token] = vec
    if dups:
        log.warning("%d duplicate embedding tokens (last occurrence kept)", dups)
    vectors = np.zeros((len(rows) + 1, expected_dim))
    if rows:
        vectors[1:] = np.stack(list(rows.values()))
    return EmbeddingTable([PAD, *rows], vectors, duplicate_count=dups)


def read_embeddings(path: str | Path, expected_dim: int,
                    keep: Collection[str] | None = None) -> EmbeddingTable:
    with open(path, encoding="utf-8", newline="\n") as fh:
        return load_embeddings(fh, expected_dim, keep)


def attach_vocab(table: EmbeddingTable, corpus: Iterable[Sequence[str]], rng_seed: int) -> EmbeddingTable:
    """Add a random row for every corpus token missing from ``table``.

    New rows are drawn i.i.d. uniform on [-0.25, 0.25] in first-appearance
    order; existing rows are copied unchanged.
    """
    new: dict[str, None] = {}
    for tokens in corpus:
        for tok in tokens:
            if tok not in table.token_index:
                new[tok] = None
    if not new:
        return table
    rng = np.random.default_rng(rng_seed)
    extra = rng.uniform(-OOV_RANGE, OOV_RANGE, size=(len(new), table.dim))
    return EmbeddingTable(table.tokens + list(new), np.vstack([table.vectors, extra]),
                          duplicate_count=table.duplicate_count)


def encode(tokens: Sequence[str], table: EmbeddingTable, n: int, label: int | None = None,
           unknown: str = "error") -> EncodedExample:
    """Map tokens to rows, truncating or padding to exactly ``n`` positions.

    ``unknown="drop"`` silently skips tokens without a row, which is the
    inference-time policy for text never seen during training.
    """
    if unknown not in ("error", "drop"):
        raise ValueError(f"unknown-token policy must be 'error' or 'drop', not {unknown!r}")
    idx = []
    for tok in tokens:
        row = table.token_index.get(tok)
        if row is None:
            if unknown == "error":
                raise DataError(f"token {tok!r} has no embedding row")
            continue
        idx.append(row)
    idx = idx[:n]
    out = np.full(n, table.pad_index, dtype=np.int64)
    out[:len(idx)] = idx
    return EncodedExample(out, len(idx), label)
