"""One-layer convolutional sentence model over word embeddings.

Each filter of window ``h`` computes ``relu(w . x[i:i+h] + b)`` at every
window of the padded input, the resulting feature map is max-pooled to one
value, and the pooled values of all filters feed a softmax layer (or, in
ordinal mode, ``C-1`` sigmoid units).

Filters of one window size are stored together as a ``(maps, h*k)`` matrix,
so a window group is a single matrix product per example. Everything is
float64 so that finite-difference checks are meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .embed import EncodedExample
from .ordinal import encode_ordinal, ordinal_loss, ordinal_loss_grad, sigmoid

HEADS = ("softmax", "ordinal")
_P_FLOOR = 1e-12


@dataclass(frozen=True)
class ConvFilter:
    h: int
    w: np.ndarray
    b: float

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("window length must be >= 1")


@dataclass
class CnnParams:
    embeddings: np.ndarray
    windows: tuple[int, ...]
    conv_w: list[np.ndarray]
    conv_b: list[np.ndarray]
    out_w: np.ndarray
    out_b: np.ndarray
    n_classes: int
    head: str = "softmax"
    pad_index: int = 0

    def __post_init__(self):
        self.windows = tuple(int(h) for h in self.windows)
        self.validate()

    def validate(self):
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}, not {self.head!r}")
        if self.n_classes not in (2, 3, 5):
            raise ValueError(f"class count must be 2, 3 or 5 (got {self.n_classes})")
        k = self.k
        if not (len(self.windows) == len(self.conv_w) == len(self.conv_b)):
            raise ValueError("one weight matrix and bias vector per window size")
        for h, w, b in zip(self.windows, self.conv_w, self.conv_b):
            if w.ndim != 2 or w.shape[1] != h * k or b.shape != (w.shape[0],):
                raise ValueError(f"window {h}: weights {w.shape} / bias {b.shape} inconsistent with k={k}")
        if self.out_w.shape != (self.n_outputs, self.n_filters) or self.out_b.shape != (self.n_outputs,):
            raise ValueError(f"output layer {self.out_w.shape} does not match "
                             f"{self.n_outputs} outputs x {self.n_filters} filters")

    @property
    def k(self) -> int:
        return self.embeddings.shape[1]

    @property
    def maps(self) -> tuple[int, ...]:
        return tuple(w.shape[0] for w in self.conv_w)

    @property
    def n_filters(self) -> int:
        return sum(self.maps)

    @property
    def n_outputs(self) -> int:
        return self.n_classes - 1 if self.head == "ordinal" else self.n_classes

    def filters(self):
        for h, w, b in zip(self.windows, self.conv_w, self.conv_b):
            for j in range(w.shape[0]):
                yield ConvFilter(h, w[j], float(b[j]))

    def dense(self) -> list[np.ndarray]:
        """Every array except the embeddings, in checkpoint order."""
        return [*self.conv_w, self.out_w, *self.conv_b, self.out_b]

    def copy(self) -> "CnnParams":
        return CnnParams(self.embeddings.copy(), self.windows,
                         [w.copy() for w in self.conv_w], [b.copy() for b in self.conv_b],
                         self.out_w.copy(), self.out_b.copy(), self.n_classes, self.head, self.pad_index)


def init_params(embeddings: np.ndarray, n_classes: int, windows=(3, 4, 5), maps: int = 100,
                rng: np.random.Generator | None = None, head: str = "softmax") -> CnnParams:
    """Glorot-uniform weights, zero biases. ``embeddings`` is copied."""
    rng = np.random.default_rng() if rng is None else rng
    k = embeddings.shape[1]
    conv_w, conv_b = [], []
    for h in windows:
        a = np.sqrt(6.0 / (h * k + maps))
        conv_w.append(rng.uniform(-a, a, size=(maps, h * k)))
        conv_b.append(np.zeros(maps))
    n_out = n_classes - 1 if head == "ordinal" else n_classes
    f = maps * len(windows)
    a = np.sqrt(6.0 / (f + n_out))
    emb = embeddings.copy()
    emb[0] = 0.0
    return CnnParams(emb, tuple(windows), conv_w, conv_b, rng.uniform(-a, a, size=(n_out, f)),
                     np.zeros(n_out), n_classes, head)


def conv_feature(f: ConvFilter, window) -> float:
    window = np.asarray(window, dtype=np.float64)
    if window.shape != f.w.shape:
        raise ValueError(f"window of size {window.size} for a filter of size {f.w.size}")
    return max(float(f.w @ window) + f.b, 0.0)


def _windows(x: np.ndarray, h: int) -> np.ndarray:
    n, k = x.shape
    if n < h:
        raise ValueError(f"input length {n} shorter than window {h}")
    # row i is the concatenation x[i] ++ ... ++ x[i+h-1]
    return sliding_window_view(x.reshape(-1), h * k)[::k]


def feature_map(f: ConvFilter, example: EncodedExample, embeddings: np.ndarray) -> np.ndarray:
    wins = _windows(embeddings[example.indices], f.h)
    if wins.shape[1] != f.w.size:
        raise ValueError(f"filter size {f.w.size} does not match window size {wins.shape[1]}")
    return np.maximum(wins @ f.w + f.b, 0.0)


def max_pool(c) -> tuple[float, int]:
    c = np.asarray(c)
    if c.size == 0:
        raise ValueError("cannot pool an empty feature map")
    i = int(np.argmax(c))  # first maximum
    return float(c[i]), i


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


@dataclass
class ForwardTrace:
    indices: np.ndarray
    windows: list[np.ndarray]
    maps: list[np.ndarray]
    argmax: list[np.ndarray]
    pooled: np.ndarray
    mask: np.ndarray | None
    keep_prob: float
    hidden: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    head: str = "softmax"

    @property
    def prediction(self) -> int:
        if self.head == "ordinal":
            return int(np.count_nonzero(self.probs > 0.5))
        return int(np.argmax(self.probs))


def forward(params: CnnParams, example: EncodedExample, mask: np.ndarray | None = None,
            keep_prob: float = 0.7) -> ForwardTrace:
    """Forward pass. Passing a dropout ``mask`` selects training mode.

    Training scales the masked pooled vector by ``1/keep_prob`` so that
    inference uses the weights as they are.
    """
    x = params.embeddings[example.indices]
    wins, maps, arg, pooled = [], [], [], []
    for h, w, b in zip(params.windows, params.conv_w, params.conv_b):
        win = _windows(x, h)
        c = np.maximum(win @ w.T + b, 0.0)
        a = np.argmax(c, axis=0)
        wins.append(win)
        maps.append(c)
        arg.append(a)
        pooled.append(c[a, np.arange(c.shape[1])])
    pooled = np.concatenate(pooled)
    if mask is None:
        hidden = pooled
    else:
        mask = np.asarray(mask, dtype=np.float64)
        if mask.shape != pooled.shape:
            raise ValueError(f"dropout mask has {mask.size} entries for {pooled.size} filters")
        hidden = pooled * mask / keep_prob
    logits = params.out_w @ hidden + params.out_b
    probs = sigmoid(logits) if params.head == "ordinal" else softmax(logits)
    return ForwardTrace(example.indices, wins, maps, arg, pooled, mask, keep_prob,
                        hidden, logits, probs, params.head)


def l2_penalty(params: CnnParams, l2: float) -> float:
    if l2 == 0:
        return 0.0
    sq = sum(float(np.sum(w * w)) for w in params.conv_w) + float(np.sum(params.out_w ** 2))
    return 0.5 * l2 * sq


def loss(trace: ForwardTrace, label: int, params: CnnParams, l2: float = 0.0) -> float:
    if not 0 <= label < params.n_classes:
        raise ValueError(f"label {label} out of range for {params.n_classes} classes")
    if params.head == "ordinal":
        data = ordinal_loss(trace.logits, encode_ordinal(label, params.n_classes))
    else:
        data = -np.log(max(trace.probs[label], _P_FLOOR))
    return float(data) + l2_penalty(params, l2)


@dataclass
class Gradients:
    conv_w: list[np.ndarray]
    conv_b: list[np.ndarray]
    out_w: np.ndarray
    out_b: np.ndarray
    emb_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    emb_grad: np.ndarray | None = None

    def dense(self) -> list[np.ndarray]:
        return [*self.conv_w, self.out_w, *self.conv_b, self.out_b]

    def is_finite(self) -> bool:
        ok = all(np.all(np.isfinite(g)) for g in self.dense())
        return ok and (self.emb_grad is None or bool(np.all(np.isfinite(self.emb_grad))))

    def embedding_dense(self, vocab_size: int) -> np.ndarray:
        out = np.zeros((vocab_size, self.emb_grad.shape[1] if self.emb_grad is not None else 0))
        if self.emb_grad is not None:
            out[self.emb_rows] = self.emb_grad
        return out

    @staticmethod
    def mean(grads: list["Gradients"]) -> "Gradients":
        m = len(grads)
        first = grads[0]
        conv_w = [sum(g.conv_w[i] for g in grads) / m for i in range(len(first.conv_w))]
        conv_b = [sum(g.conv_b[i] for g in grads) / m for i in range(len(first.conv_b))]
        out_w = sum(g.out_w for g in grads) / m
        out_b = sum(g.out_b for g in grads) / m
        rows, vals = _merge_rows([g.emb_rows for g in grads], [g.emb_grad for g in grads])
        return Gradients(conv_w, conv_b, out_w, out_b, rows, None if vals is None else vals / m)


def _merge_rows(rows: list[np.ndarray], vals: list[np.ndarray | None]):
    pairs = [(r, v) for r, v in zip(rows, vals) if v is not None and len(r)]
    if not pairs:
        return np.zeros(0, dtype=np.int64), None
    allr = np.concatenate([r for r, _ in pairs])
    allv = np.concatenate([v for _, v in pairs])
    uniq, inv = np.unique(allr, return_inverse=True)
    out = np.zeros((len(uniq), allv.shape[1]))
    np.add.at(out, inv, allv)
    return uniq, out


def backward(trace: ForwardTrace, example: EncodedExample, label: int, params: CnnParams,
             l2: float = 0.0) -> Gradients:
    """Exact gradients of ``loss`` for one example.

    Gradient reaches a filter only through its pooled (argmax) window and
    only where the ReLU input is strictly positive. The pad row never gets
    a gradient.
    """
    if (trace.head != params.head or len(trace.maps) != len(params.conv_w)
            or trace.pooled.shape != (params.n_filters,)
            or not np.array_equal(trace.indices, example.indices)):
        raise ValueError("trace does not belong to this example and parameter set")
    if params.head == "ordinal":
        dlogits = ordinal_loss_grad(trace.logits, encode_ordinal(label, params.n_classes))
    else:
        dlogits = trace.probs.copy()
        dlogits[label] -= 1.0
    g_out_w = np.outer(dlogits, trace.hidden) + l2 * params.out_w
    g_out_b = dlogits
    dpooled = params.out_w.T @ dlogits
    if trace.mask is not None:
        dpooled = dpooled * trace.mask / trace.keep_prob

    g_conv_w, g_conv_b, rows, vals = [], [], [], []
    k = params.k
    offset = 0
    for h, w, win, c, a in zip(params.windows, params.conv_w, trace.windows, trace.maps, trace.argmax):
        m = w.shape[0]
        active = c[a, np.arange(m)] > 0.0
        coeff = np.where(active, dpooled[offset:offset + m], 0.0)
        offset += m
        g_conv_w.append(coeff[:, None] * win[a] + l2 * w)
        g_conv_b.append(coeff)
        r = example.indices[a[:, None] + np.arange(h)].reshape(-1)
        v = (coeff[:, None] * w).reshape(m * h, k)
        keep = (r != params.pad_index) & np.repeat(coeff != 0.0, h)
        rows.append(r[keep])
        vals.append(v[keep])
    emb_rows, emb_grad = _merge_rows(rows, vals)
    return Gradients(g_conv_w, g_conv_b, g_out_w, g_out_b, emb_rows, emb_grad)
