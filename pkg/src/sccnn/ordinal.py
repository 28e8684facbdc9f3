"""Ordinal labels as C-1 cumulative binary targets.

Class ``j`` becomes ``bits[k] = 1 iff j > k``; a network with C-1 sigmoid
outputs is trained against these bits and decoded by counting outputs above
one half.
"""

from __future__ import annotations

import numpy as np

_CLAMP = 1e-12


def encode_ordinal(label: int, n_classes: int) -> np.ndarray:
    if not 0 <= label < n_classes:
        raise ValueError(f"label {label} out of range for {n_classes} classes")
    return (label > np.arange(n_classes - 1)).astype(np.float64)


def decode_ordinal(outputs) -> int:
    """Number of outputs strictly above 0.5.

    Counting rather than scanning to the first failure keeps the decoder
    total on non-monotone outputs.
    """
    return int(np.count_nonzero(np.asarray(outputs) > 0.5))


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def ordinal_loss(logits, targets) -> float:
    """Summed binary cross-entropy of ``sigmoid(logits)`` against the bits."""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if logits.shape != targets.shape:
        raise ValueError(f"{logits.shape[0]} outputs for {targets.shape[0]} targets")
    s = np.clip(sigmoid(logits), _CLAMP, 1.0 - _CLAMP)
    return float(-np.sum(targets * np.log(s) + (1.0 - targets) * np.log(1.0 - s)))


def ordinal_loss_grad(logits, targets) -> np.ndarray:
    return sigmoid(logits) - np.asarray(targets, dtype=np.float64)
