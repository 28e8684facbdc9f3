"""Central finite-difference check of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnn import CnnParams, Gradients, backward, forward, init_params, loss
from .embed import EncodedExample

STEP = 1e-5
# relative error is measured against max(|analytic|, |numeric|, FLOOR) so that
# gradients that are zero up to rounding do not blow up the ratio
FLOOR = 1e-6


@dataclass
class GradCheckReport:
    max_rel_error: float
    per_group: dict[str, float]
    n_checked: int

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_error < tol


def tiny_problem(seed: int, vocab: int = 20, k: int = 8, n: int = 12, windows=(2, 3), maps: int = 4,
                 n_classes: int = 3, head: str = "softmax", n_examples: int = 3):
    """A random small model plus a handful of random examples with padding."""
    rng = np.random.default_rng(seed)
    emb = rng.normal(0.0, 1.0, size=(vocab, k))
    emb[0] = 0.0
    params = init_params(emb, n_classes, windows, maps, rng, head)
    for b in params.conv_b:
        b[:] = rng.normal(0.0, 0.1, size=b.shape)
    params.out_b[:] = rng.normal(0.0, 0.1, size=params.out_b.shape)
    examples, labels, masks = [], [], []
    for _ in range(n_examples):
        length = int(rng.integers(max(windows), n + 1))
        idx = np.zeros(n, dtype=np.int64)
        idx[:length] = rng.integers(1, vocab, size=length)
        examples.append(EncodedExample(idx, length))
        labels.append(int(rng.integers(n_classes)))
        masks.append((rng.random(params.n_filters) < 0.7).astype(np.float64))
    return params, examples, labels, masks


def _batch_loss(params, examples, labels, masks, l2, keep_prob):
    return np.mean([loss(forward(params, ex, m, keep_prob), y, params, l2)
                    for ex, y, m in zip(examples, labels, masks)])


def _batch_grad(params, examples, labels, masks, l2, keep_prob) -> Gradients:
    return Gradients.mean([backward(forward(params, ex, m, keep_prob), ex, y, params, l2)
                           for ex, y, m in zip(examples, labels, masks)])


def check_gradients(params: CnnParams, examples, labels, masks=None, l2: float = 0.01,
                    keep_prob: float = 0.7, step: float = STEP) -> GradCheckReport:
    """Compare analytic and central-difference gradients of the mean batch loss.

    Every scalar of every group is perturbed, including all embedding rows
    except the pad row (whose analytic gradient must be exactly zero).
    """
    masks = [None] * len(examples) if masks is None else masks
    grads = _batch_grad(params, examples, labels, masks, l2, keep_prob)
    groups = {}
    for i, h in enumerate(params.windows):
        groups[f"conv_w[{h}]"] = (params.conv_w[i], grads.conv_w[i])
        groups[f"conv_b[{h}]"] = (params.conv_b[i], grads.conv_b[i])
    groups["out_w"] = (params.out_w, grads.out_w)
    groups["out_b"] = (params.out_b, grads.out_b)
    emb_grad = grads.embedding_dense(params.embeddings.shape[0]) if grads.emb_grad is not None \
        else np.zeros_like(params.embeddings)
    if np.any(emb_grad[params.pad_index] != 0.0):
        raise AssertionError("pad row received a gradient")
    groups["embeddings"] = (params.embeddings, emb_grad)

    per_group, count = {}, 0
    for name, (arr, g) in groups.items():
        worst = 0.0
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            if name == "embeddings" and j // arr.shape[1] == params.pad_index:
                continue
            old = flat[j]
            flat[j] = old + step
            up = _batch_loss(params, examples, labels, masks, l2, keep_prob)
            flat[j] = old - step
            down = _batch_loss(params, examples, labels, masks, l2, keep_prob)
            flat[j] = old
            num = (up - down) / (2 * step)
            rel = abs(num - gflat[j]) / max(abs(num), abs(gflat[j]), FLOOR)
            worst = max(worst, rel)
            count += 1
        per_group[name] = worst
    return GradCheckReport(max(per_group.values()), per_group, count)


def run_gradcheck(seeds=range(10), head: str = "softmax", l2: float = 0.01) -> list[GradCheckReport]:
    reports = []
    for seed in seeds:
        params, examples, labels, masks = tiny_problem(seed, head=head)
        reports.append(check_gradients(params, examples, labels, masks, l2=l2))
    return reports
