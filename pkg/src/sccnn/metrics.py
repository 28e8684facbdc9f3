"""Classification, ordinal-error and quantification scores.

Conventions match the usual tweet-sentiment shared-task scorers: P/R/F1 with 0/0 -> 0,
MAE macro-averaged over the gold classes present, KLD and RAE on
distributions smoothed with ``eps = 1/(2N)``, EMD with unit distance
between adjacent classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Scale


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are gold classes, columns predicted classes."""

    scale: Scale
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class SentimentDistribution:
    scale: Scale
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.shape != (self.scale.size,):
            raise ValueError(f"{p.size} probabilities for a {self.scale.value}-point scale")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"not a distribution: {p}")
        object.__setattr__(self, "p", p)

    @classmethod
    def from_labels(cls, labels, scale: Scale) -> "SentimentDistribution":
        labels = list(labels)
        if not labels:
            raise ValueError("cannot build a distribution from zero labels")
        counts = np.bincount(labels, minlength=scale.size).astype(np.float64)
        return cls(scale, counts / counts.sum())


def _p(x) -> np.ndarray:
    return np.asarray(getattr(x, "p", x), dtype=np.float64)


def confusion(preds, golds, scale: Scale) -> ConfusionMatrix:
    preds, golds = np.asarray(preds, dtype=np.int64), np.asarray(golds, dtype=np.int64)
    if preds.shape != golds.shape:
        raise ValueError(f"{preds.size} predictions for {golds.size} gold labels")
    c = scale.size
    if preds.size and (preds.min() < 0 or golds.min() < 0 or preds.max() >= c or golds.max() >= c):
        raise ValueError(f"class index outside the {c}-point scale")
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (golds, preds), 1)
    return ConfusionMatrix(scale, counts)


def _div(a: float, b: float) -> float:
    return a / b if b else 0.0


def f1_class(cm: ConfusionMatrix, c: int) -> tuple[float, float, float]:
    tp = float(cm.counts[c, c])
    p = _div(tp, float(cm.counts[:, c].sum()))
    r = _div(tp, float(cm.counts[c, :].sum()))
    return p, r, _div(2 * p * r, p + r)


def classification_scores(cm: ConfusionMatrix) -> dict[str, float]:
    """F1_PN (2- and 3-point scales only), AvgRec, Acc and macro-F1."""
    if cm.total == 0:
        raise ValueError("no scored examples")
    prf = [f1_class(cm, c) for c in range(cm.scale.size)]
    out = {}
    if cm.scale is not Scale.FIVE:
        out["F1_PN"] = (prf[cm.scale.positive][2] + prf[cm.scale.negative][2]) / 2
    out["AvgRec"] = sum(r for _, r, _ in prf) / len(prf)
    out["Acc"] = float(np.trace(cm.counts)) / cm.total
    out["macro_F1"] = sum(f for _, _, f in prf) / len(prf)
    return out


@dataclass(frozen=True)
class MaeReport:
    macro: float
    micro: float
    per_class: dict[str, float]


def mae_scores(preds, golds, scale: Scale) -> MaeReport:
    if scale is Scale.TWO:
        raise ValueError("MAE needs an ordinal 3- or 5-point scale")
    preds, golds = np.asarray(preds, dtype=np.int64), np.asarray(golds, dtype=np.int64)
    if preds.size == 0:
        raise ValueError("no scored examples")
    if preds.shape != golds.shape:
        raise ValueError(f"{preds.size} predictions for {golds.size} gold labels")
    vals = scale.ordinal_values
    err = np.abs(vals[preds] - vals[golds]).astype(np.float64)
    per_class = {scale.label_name(c): float(err[golds == c].mean())
                 for c in range(scale.size) if np.any(golds == c)}
    return MaeReport(float(np.mean(list(per_class.values()))), float(err.mean()), per_class)


def smooth(p, test_size: float) -> np.ndarray:
    """``(p + eps) / (1 + C*eps)`` with ``eps = 1/(2N)``; ``N = inf`` leaves p unchanged."""
    if not test_size > 0:
        raise ValueError(f"test size must be positive (got {test_size})")
    p = _p(p)
    eps = 1.0 / (2.0 * test_size)
    return (p + eps) / (1.0 + p.size * eps)


def kld(true_p, pred_p, test_size: float) -> float:
    p, q = smooth(true_p, test_size), smooth(pred_p, test_size)
    if p.shape != q.shape:
        raise ValueError("distributions on different scales")
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))


def absolute_error(true_p, pred_p) -> float:
    p, q = _p(true_p), _p(pred_p)
    if p.shape != q.shape:
        raise ValueError("distributions on different scales")
    return float(np.mean(np.abs(q - p)))


def relative_absolute_error(true_p, pred_p, test_size: float) -> float:
    p, q = smooth(true_p, test_size), smooth(pred_p, test_size)
    if p.shape != q.shape:
        raise ValueError("distributions on different scales")
    return float(np.mean(np.abs(q - p) / p))


def abs_errors(true_p, pred_p, test_size: float) -> dict[str, float]:
    return {"AE": absolute_error(true_p, pred_p),
            "RAE": relative_absolute_error(true_p, pred_p, test_size)}


def emd(true_p, pred_p) -> float:
    p, q = _p(true_p), _p(pred_p)
    if p.shape != q.shape:
        raise ValueError("distributions on different scales")
    return float(np.sum(np.abs(np.cumsum(q)[:-1] - np.cumsum(p)[:-1])))


def score_report(preds, golds, scale: Scale) -> dict[str, float]:
    """Every classification metric that applies to ``scale``."""
    out = classification_scores(confusion(preds, golds, scale))
    if scale is not Scale.TWO:
        m = mae_scores(preds, golds, scale)
        out["MAE_M"] = m.macro
        out["MAE_mu"] = m.micro
        for label, v in m.per_class.items():
            out[f"MAE_M[{label}]"] = v
    return out


def format_metrics(scores: dict[str, float]) -> str:
    """One ``name=value`` line per metric, six decimals."""
    return "".join(f"{k}={v:.6f}\n" for k, v in scores.items())


def render_table(scores: dict[str, float], title: str = "Metric") -> str:
    width = max(len(title), *(len(k) for k in scores))
    lines = [f"{title:<{width}} | Score", f"{'-' * width}-+-------"]
    lines += [f"{k:<{width}} | {v:.3f}" if math.isfinite(v) else f"{k:<{width}} | nan"
              for k, v in scores.items()]
    return "\n".join(lines) + "\n"
