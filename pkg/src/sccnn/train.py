"""Mini-batch Adadelta training with dev-set model selection and early stopping."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cnn import CnnParams, Gradients, backward, forward, init_params, loss
from .corpus import DataError, Dataset, Scale
from .embed import EmbeddingTable, EncodedExample, attach_vocab, encode
from .metrics import classification_scores, confusion, mae_scores
from .model import Model
from .text_prep import preprocess

log = logging.getLogger(__name__)


class NumericError(ArithmeticError):
    """A loss or gradient became non-finite."""


@dataclass
class TrainConfig:
    batch_size: int = 10
    max_epochs: int = 15
    dropout: float = 0.3
    l2: float = 0.01
    window_sizes: tuple[int, ...] = (3, 4, 5)
    maps_per_window: int = 100
    n: int = 50
    k: int = 200
    rho: float = 0.95
    eps: float = 1e-6
    patience: int | None = 5
    selection_metric: str | None = None
    seed: int = 42
    freeze_embeddings: bool = False
    ordinal: bool = False

    @property
    def keep_prob(self) -> float:
        return 1.0 - self.dropout


# --- optimizer -------------------------------------------------------------

def _adadelta(x, g, eg2, edx2, rho, eps):
    eg2 *= rho
    eg2 += (1.0 - rho) * g * g
    dx = -(np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps)) * g
    edx2 *= rho
    edx2 += (1.0 - rho) * dx * dx
    x += dx


@dataclass
class AdadeltaState:
    """Running averages of squared gradients and squared updates.

    Embedding rows are updated lazily: a row that got no gradient for ``m``
    steps has its accumulators decayed by ``rho**m`` the next time it is
    touched (or on ``sync``), which matches dense updates with zero gradient.
    """

    rho: float
    eps: float
    eg2: list[np.ndarray]
    edx2: list[np.ndarray]
    emb_eg2: np.ndarray
    emb_edx2: np.ndarray
    emb_last: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, params: CnnParams, rho: float = 0.95, eps: float = 1e-6) -> "AdadeltaState":
        dense = params.dense()
        return cls(rho, eps, [np.zeros_like(a) for a in dense], [np.zeros_like(a) for a in dense],
                   np.zeros_like(params.embeddings), np.zeros_like(params.embeddings),
                   np.zeros(params.embeddings.shape[0], dtype=np.int64))

    def _catch_up(self, rows, upto):
        factor = self.rho ** (upto - self.emb_last[rows]).astype(np.float64)
        self.emb_eg2[rows] *= factor[:, None]
        self.emb_edx2[rows] *= factor[:, None]
        self.emb_last[rows] = upto

    def sync(self):
        self._catch_up(np.arange(self.emb_last.size), self.step)


def adadelta_step(state: AdadeltaState, grads: Gradients, params: CnnParams,
                  update_embeddings: bool = True) -> None:
    """One in-place Adadelta update of ``params``.

    Per scalar: ``Eg2 = rho Eg2 + (1-rho) g^2``,
    ``dx = -sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g``,
    ``Edx2 = rho Edx2 + (1-rho) dx^2``, ``x += dx``.
    """
    dense_g = grads.dense()
    for name, g in zip(_group_names(params), dense_g):
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in {name}")
    if grads.emb_grad is not None and not np.all(np.isfinite(grads.emb_grad)):
        raise NumericError("non-finite gradient in embeddings")
    state.step += 1
    for x, g, a, b in zip(params.dense(), dense_g, state.eg2, state.edx2):
        if x.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} for parameter {x.shape}")
        _adadelta(x, g, a, b, state.rho, state.eps)
    if update_embeddings and grads.emb_grad is not None and len(grads.emb_rows):
        rows = grads.emb_rows
        state._catch_up(rows, state.step - 1)
        x, a, b = params.embeddings[rows], state.emb_eg2[rows], state.emb_edx2[rows]
        _adadelta(x, grads.emb_grad, a, b, state.rho, state.eps)
        params.embeddings[rows], state.emb_eg2[rows], state.emb_edx2[rows] = x, a, b
        state.emb_last[rows] = state.step


def _group_names(params: CnnParams) -> list[str]:
    return ([f"conv_w[{h}]" for h in params.windows] + ["out_w"]
            + [f"conv_b[{h}]" for h in params.windows] + ["out_b"])


# --- model selection -------------------------------------------------------

@dataclass(frozen=True)
class SelectionMetric:
    name: str
    fn: Callable[[list[int], list[int], Scale], float]
    maximize: bool = True

    def __call__(self, preds, golds, scale: Scale) -> float:
        return self.fn(preds, golds, scale)

    def better(self, a: float, b: float | None) -> bool:
        if b is None:
            return True
        return a > b if self.maximize else a < b


def _cls(key):
    return lambda p, g, s: classification_scores(confusion(p, g, s))[key]


METRICS = {
    "f1pn": SelectionMetric("F1_PN", _cls("F1_PN")),
    "acc": SelectionMetric("Acc", _cls("Acc")),
    "avgrec": SelectionMetric("AvgRec", _cls("AvgRec")),
    "mae": SelectionMetric("MAE_M", lambda p, g, s: mae_scores(p, g, s).macro, maximize=False),
}


def select_metric(scale: Scale, override: str | None = None) -> SelectionMetric:
    """F1_PN on 2- and 3-point scales, macro MAE on the 5-point scale."""
    key = override or ("mae" if scale is Scale.FIVE else "f1pn")
    if key not in METRICS:
        raise ValueError(f"unknown selection metric {key!r}; choose from {sorted(METRICS)}")
    if key == "f1pn" and scale is Scale.FIVE:
        raise ValueError("F1_PN is undefined on the 5-point scale")
    if key == "mae" and scale is Scale.TWO:
        raise ValueError("MAE needs an ordinal 3- or 5-point scale")
    return METRICS[key]


# --- training loop ---------------------------------------------------------

@dataclass
class FitResult:
    best_model: Model
    best_epoch: int
    best_score: float
    metric: str
    dev_scores: list[float] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)
    stopped_early: bool = False
    log_lines: list[str] = field(default_factory=list)
    optimizer_state: AdadeltaState | None = None

    @property
    def best_params(self) -> CnnParams:
        return self.best_model.params


def seed_streams(seed: int) -> tuple[int, np.random.Generator, np.random.Generator]:
    """Derive the OOV seed, init RNG and shuffle/dropout RNG from one root seed."""
    oov, init, shuffle = np.random.SeedSequence(seed).spawn(3)
    return int(oov.generate_state(1)[0]), np.random.default_rng(init), np.random.default_rng(shuffle)


def encode_dataset(d: Dataset, table: EmbeddingTable, n: int, unknown: str = "error") -> list[EncodedExample]:
    return [encode(preprocess(t.text), table, n, t.label, unknown) for t in d.tweets]


def evaluate_examples(params: CnnParams, examples: list[EncodedExample], metric: SelectionMetric,
                      scale: Scale) -> float:
    preds = [forward(params, ex).prediction for ex in examples]
    return metric(preds, [ex.label for ex in examples], scale)


def fit(config: TrainConfig, train: Dataset, dev: Dataset, table: EmbeddingTable,
        on_epoch: Callable[[str], None] | None = None) -> FitResult:
    if not len(train):
        raise DataError("empty training set")
    if not len(dev):
        raise DataError("empty development set")
    if train.scale is not dev.scale:
        raise DataError("training and development sets use different scales")
    if table.dim != config.k:
        raise DataError(f"embedding dimension {table.dim} does not match k={config.k}")
    if any(t.label is None for t in (*train.tweets, *dev.tweets)):
        raise DataError("training and development tweets must be labeled")
    scale = train.scale
    metric = select_metric(scale, config.selection_metric)
    oov_seed, init_rng, rng = seed_streams(config.seed)

    tokens = [preprocess(t.text) for t in (*train.tweets, *dev.tweets)]
    table = attach_vocab(table, tokens, oov_seed)
    train_ex = encode_dataset(train, table, config.n)
    dev_ex = encode_dataset(dev, table, config.n)

    params = init_params(table.vectors, scale.size, config.window_sizes, config.maps_per_window,
                         init_rng, "ordinal" if config.ordinal else "softmax")
    state = AdadeltaState.zeros(params, config.rho, config.eps)
    keep = config.keep_prob

    best, best_score, best_epoch = None, None, 0
    result = FitResult(None, 0, float("nan"), metric.name)
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_ex))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            grads = []
            for i in order[start:start + config.batch_size]:
                ex = train_ex[i]
                mask = (rng.random(params.n_filters) < keep).astype(np.float64)
                trace = forward(params, ex, mask, keep)
                value = loss(trace, ex.label, params, config.l2)
                if not np.isfinite(value):
                    raise NumericError(f"non-finite loss at epoch {epoch}, example {i}")
                total += value
                grads.append(backward(trace, ex, ex.label, params, config.l2))
            adadelta_step(state, Gradients.mean(grads), params,
                          update_embeddings=not config.freeze_embeddings)
        train_loss = total / len(train_ex)
        score = evaluate_examples(params, dev_ex, metric, scale)
        improved = metric.better(score, best_score)
        if improved:
            best, best_score, best_epoch, stale = params.copy(), score, epoch, 0
        else:
            stale += 1
        result.dev_scores.append(score)
        result.train_losses.append(train_loss)
        line = (f"epoch={epoch} train_loss={train_loss:.6f} dev_{metric.name}={score:.6f} "
                f"best={'true' if improved else 'false'}")
        result.log_lines.append(line)
        log.info(line)
        if on_epoch is not None:
            on_epoch(line)
        if config.patience and stale >= config.patience and epoch < config.max_epochs:
            result.stopped_early = True
            break
    state.sync()
    result.best_model = Model(EmbeddingTable(table.tokens, best.embeddings), best, config.n)
    result.best_epoch, result.best_score = best_epoch, best_score
    result.optimizer_state = state
    return result
