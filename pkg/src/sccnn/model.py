"""A trained classifier: vocabulary, parameters and input length, plus its file format.

Checkpoint layout::

    sccnn v1 k=<k> n=<n> C=<C> windows=<h:maps,...>[ head=ordinal]\\n
    <vocabulary size>\\n
    <token>\\n                      (one per vocabulary row, row order)
    <little-endian float64 arrays>  embeddings, conv weights by window,
                                    output weights, conv biases by window,
                                    output bias
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cnn import CnnParams, forward
from .corpus import DataError, Scale, Tweet
from .embed import EmbeddingTable, EncodedExample, encode
from .text_prep import preprocess

MAGIC = "sccnn"
VERSION = "v1"
_F8 = np.dtype("<f8")


@dataclass
class Model:
    table: EmbeddingTable
    params: CnnParams
    n: int

    def __post_init__(self):
        if self.table.vectors is not self.params.embeddings:
            self.table = EmbeddingTable(self.table.tokens, self.params.embeddings)

    @property
    def scale(self) -> Scale:
        return Scale(self.params.n_classes)

    def encode_text(self, text: str, label: int | None = None) -> EncodedExample:
        return encode(preprocess(text), self.table, self.n, label, unknown="drop")

    def predict_examples(self, examples: Sequence[EncodedExample]) -> list[int]:
        return [forward(self.params, ex).prediction for ex in examples]

    def predict(self, tweets: Sequence[Tweet]) -> list[int]:
        return self.predict_examples([self.encode_text(t.text) for t in tweets])


def _header(model: Model) -> str:
    p = model.params
    wins = ",".join(f"{h}:{m}" for h, m in zip(p.windows, p.maps))
    head = " head=ordinal" if p.head == "ordinal" else ""
    return f"{MAGIC} {VERSION} k={p.k} n={model.n} C={p.n_classes} windows={wins}{head}"


def to_bytes(model: Model) -> bytes:
    p = model.params
    buf = io.BytesIO()
    buf.write((_header(model) + "\n").encode("utf-8"))
    buf.write(f"{len(model.table.tokens)}\n".encode("utf-8"))
    for tok in model.table.tokens:
        buf.write((tok + "\n").encode("utf-8"))
    for arr in [p.embeddings, *p.conv_w, p.out_w, *p.conv_b, p.out_b]:
        buf.write(np.ascontiguousarray(arr, dtype=_F8).tobytes())
    return buf.getvalue()


def save_checkpoint(model: Model, path: str | Path) -> None:
    Path(path).write_bytes(to_bytes(model))


def _parse_header(line: str) -> dict:
    parts = line.split()
    if len(parts) < 2 or parts[0] != MAGIC:
        raise DataError("not an sccnn checkpoint (bad magic)")
    if parts[1] != VERSION:
        raise DataError(f"unsupported checkpoint version {parts[1]!r}")
    fields = {}
    for item in parts[2:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise DataError(f"malformed header field {item!r}")
        fields[key] = value
    try:
        windows = [tuple(int(x) for x in w.split(":")) for w in fields["windows"].split(",")]
        return {"k": int(fields["k"]), "n": int(fields["n"]), "C": int(fields["C"]),
                "windows": windows, "head": fields.get("head", "softmax")}
    except (KeyError, ValueError) as e:
        raise DataError(f"malformed checkpoint header: {e}") from None


def from_bytes(data: bytes) -> Model:
    stream = io.BytesIO(data)
    try:
        hdr = _parse_header(stream.readline().decode("utf-8"))
        size = int(stream.readline())
        tokens = [stream.readline().decode("utf-8").rstrip("\n") for _ in range(size)]
    except (UnicodeDecodeError, ValueError) as e:
        raise DataError(f"corrupt checkpoint: {e}") from None
    k, n, c = hdr["k"], hdr["n"], hdr["C"]
    n_out = c - 1 if hdr["head"] == "ordinal" else c
    f = sum(m for _, m in hdr["windows"])
    shapes = ([(size, k)] + [(m, h * k) for h, m in hdr["windows"]] + [(n_out, f)]
              + [(m,) for _, m in hdr["windows"]] + [(n_out,)])
    arrays = []
    for shape in shapes:
        count = int(np.prod(shape))
        raw = stream.read(count * _F8.itemsize)
        if len(raw) != count * _F8.itemsize:
            raise DataError("corrupt checkpoint: truncated parameter data")
        arrays.append(np.frombuffer(raw, dtype=_F8).astype(np.float64).reshape(shape))
    if stream.read(1):
        raise DataError("corrupt checkpoint: trailing bytes")
    nw = len(hdr["windows"])
    try:
        params = CnnParams(arrays[0], tuple(h for h, _ in hdr["windows"]), arrays[1:1 + nw],
                           arrays[2 + nw:2 + 2 * nw], arrays[1 + nw], arrays[-1], c, hdr["head"])
        table = EmbeddingTable(tokens, params.embeddings)
    except ValueError as e:
        raise DataError(f"corrupt checkpoint: {e}") from None
    return Model(table, params, n)


def load_checkpoint(path: str | Path) -> Model:
    return from_bytes(Path(path).read_bytes())
