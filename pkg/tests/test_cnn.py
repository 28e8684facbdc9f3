import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sccnn.cnn import (CnnParams, ConvFilter, backward, conv_feature, feature_map, forward,
                       init_params, l2_penalty, loss, max_pool, softmax)
from sccnn.embed import EncodedExample
from sccnn.gradcheck import check_gradients, tiny_problem


def zero_params(vocab=6, k=2, windows=(2, 3), maps=2, c=3):
    emb = np.random.default_rng(0).normal(size=(vocab, k))
    emb[0] = 0
    p = init_params(emb, c, windows, maps, np.random.default_rng(0))
    for w in p.conv_w:
        w[:] = 0
    p.out_w[:] = 0
    return p


def example(idx, n=None):
    idx = list(idx)
    n = n or len(idx)
    arr = np.zeros(n, dtype=np.int64)
    arr[:len(idx)] = idx
    return EncodedExample(arr, sum(1 for i in idx if i))


class TestConvFeature:
    def test_worked_example(self):
        f = ConvFilter(2, np.array([1.0, -1.0, 0.5, 0.5]), -0.5)
        assert conv_feature(f, [1, 2, 3, 4]) == 2.0

    def test_relu_clips(self):
        assert conv_feature(ConvFilter(1, np.zeros(3), -1.0), [5, 5, 5]) == 0.0

    def test_zero(self):
        assert conv_feature(ConvFilter(1, np.zeros(2), 0.0), [1, 2]) == 0.0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            conv_feature(ConvFilter(1, np.zeros(2), 0.0), [1, 2, 3])

    def test_bad_window_length(self):
        with pytest.raises(ValueError):
            ConvFilter(0, np.zeros(0), 0.0)


class TestFeatureMap:
    emb = np.vstack([np.zeros(2), np.arange(2, 12, dtype=float).reshape(5, 2)])

    @pytest.mark.parametrize("n,h", [(5, 3), (3, 3), (4, 1)])
    def test_length(self, n, h):
        f = ConvFilter(h, np.ones(2 * h), 0.0)
        assert feature_map(f, example([1] * n), self.emb).shape == (n - h + 1,)

    def test_all_pad_zero(self):
        f = ConvFilter(2, np.ones(4), 0.0)
        assert not feature_map(f, example([], n=4), self.emb).any()

    def test_too_short(self):
        with pytest.raises(ValueError):
            feature_map(ConvFilter(3, np.ones(6), 0.0), example([1, 2]), self.emb)

    def test_matches_conv_feature(self):
        rng = np.random.default_rng(3)
        f = ConvFilter(2, rng.normal(size=4), 0.1)
        ex = example([1, 4, 2, 5, 3])
        c = feature_map(f, ex, self.emb)
        for i in range(4):
            window = self.emb[ex.indices[i:i + 2]].ravel()
            assert c[i] == pytest.approx(conv_feature(f, window), abs=1e-14)


class TestMaxPool:
    @pytest.mark.parametrize("c,expected", [([0, 2, 1], (2.0, 1)), ([0, 0, 0], (0.0, 0)),
                                            ([0.5], (0.5, 0)), ([1, 3, 3], (3.0, 1))])
    def test_cases(self, c, expected):
        assert max_pool(c) == expected

    def test_empty(self):
        with pytest.raises(ValueError):
            max_pool([])


class TestForward:
    def test_zero_params_uniform(self):
        p = zero_params()
        assert np.allclose(forward(p, example([1, 2, 3])).probs, 1 / 3, atol=1e-15)

    def test_all_pad_uniform(self):
        p = init_params(np.random.default_rng(1).normal(size=(5, 3)), 5, (2,), 3, np.random.default_rng(2))
        tr = forward(p, example([], n=4))
        assert not tr.pooled.any()
        assert np.allclose(tr.probs, 0.2, atol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.1, 20))
    def test_distribution_and_relu(self, seed, scale):
        params, examples, _, masks = tiny_problem(seed, n_examples=1)
        for w in params.conv_w:
            w *= scale
        params.out_w *= scale
        tr = forward(params, examples[0], masks[0])
        assert abs(tr.probs.sum() - 1) < 1e-9 and np.all(tr.probs >= 0)
        assert all(np.all(c >= 0) for c in tr.maps)
        assert [c.shape[0] for c in tr.maps] == [12 - h + 1 for h in params.windows]

    def test_inverted_dropout(self):
        params, examples, _, _ = tiny_problem(0, n_examples=1)
        mask = np.ones(params.n_filters)
        mask[::2] = 0
        tr = forward(params, examples[0], mask, keep_prob=0.7)
        assert np.allclose(tr.hidden, tr.pooled * mask / 0.7)
        assert np.array_equal(forward(params, examples[0]).hidden, tr.pooled)

    def test_mask_length(self):
        params, examples, _, _ = tiny_problem(0, n_examples=1)
        with pytest.raises(ValueError):
            forward(params, examples[0], np.ones(3))

    @given(st.lists(st.integers(1, 5), min_size=2, max_size=2), st.integers(0, 6),
           st.integers(0, 6))
    def test_shift_robustness(self, pair, first, second):
        emb = np.vstack([np.zeros(2), np.arange(1, 11, dtype=float).reshape(5, 2)])
        f = ConvFilter(2, np.array([0.5, 1.0, 1.5, 2.0]), -0.25)
        values = []
        for offset in (first, second):
            idx = np.zeros(8, dtype=np.int64)
            idx[offset:offset + 2] = pair
            value, arg = max_pool(feature_map(f, EncodedExample(idx, 2), emb))
            assume(arg == offset)
            values.append(value)
        assert values[0] == values[1]

    def test_params_validate(self):
        p = zero_params()
        with pytest.raises(ValueError):
            CnnParams(p.embeddings, p.windows, p.conv_w, p.conv_b, p.out_w, p.out_b, 4)
        with pytest.raises(ValueError):
            CnnParams(p.embeddings, p.windows, p.conv_w, p.conv_b, p.out_w[:2], p.out_b, 3)


class TestLoss:
    def test_uniform_ln3(self):
        p = zero_params()
        assert loss(forward(p, example([1, 2, 3])), 1, p, 0.0) == pytest.approx(math.log(3), abs=1e-15)

    def test_certain(self):
        p = zero_params()
        p.out_b[:] = [0, 1000, 0]
        assert loss(forward(p, example([1, 2, 3])), 1, p, 0.0) == 0.0

    def test_clamped(self):
        p = zero_params()
        p.out_b[:] = [0, 1000, 0]
        assert loss(forward(p, example([1, 2, 3])), 0, p, 0.0) == pytest.approx(-math.log(1e-12))

    def test_penalty_zero_for_zero_weights(self):
        assert l2_penalty(zero_params(), 0.01) == 0.0

    def test_penalty_excludes_biases_and_embeddings(self):
        p = zero_params()
        p.out_w[0, 0] = 2.0
        p.conv_b[0][:] = 5.0
        assert l2_penalty(p, 0.1) == pytest.approx(0.5 * 0.1 * 4.0)

    def test_bad_label(self):
        p = zero_params()
        with pytest.raises(ValueError):
            loss(forward(p, example([1, 2])), 3, p)


class TestBackward:
    def test_bias_gradient_zero_weights(self):
        p = zero_params()
        ex = example([1, 2, 3])
        tr = forward(p, ex)
        g = backward(tr, ex, 2, p, 0.0)
        assert np.allclose(g.out_b, tr.probs - np.eye(3)[2], atol=1e-15)

    def test_pad_row_never_gets_gradient(self):
        params, examples, labels, masks = tiny_problem(1)
        for ex, y, m in zip(examples, labels, masks):
            g = backward(forward(params, ex, m), ex, y, params, 0.01)
            assert params.pad_index not in set(g.emb_rows.tolist())

    def test_stale_trace(self):
        params, examples, labels, _ = tiny_problem(2, n_examples=2)
        tr = forward(params, examples[0])
        with pytest.raises(ValueError):
            backward(tr, examples[1], labels[0], params)

    def test_no_gradient_through_dead_relu(self):
        p = zero_params()
        for b in p.conv_b:
            b[:] = -1.0
        p.out_w[:] = 1.0
        ex = example([1, 2, 3])
        g = backward(forward(p, ex), ex, 0, p, 0.0)
        assert all(not gw.any() for gw in g.conv_w) and g.emb_grad is None

    @pytest.mark.parametrize("head", ["softmax", "ordinal"])
    @pytest.mark.parametrize("seed", range(3))
    def test_gradcheck(self, head, seed):
        params, examples, labels, masks = tiny_problem(seed, head=head)
        report = check_gradients(params, examples, labels, masks)
        assert report.passed(1e-4), report.per_group
        assert set(report.per_group) >= {"embeddings", "out_w", "out_b"}

    def test_gradcheck_without_dropout_or_l2(self):
        params, examples, labels, _ = tiny_problem(11)
        assert check_gradients(params, examples, labels, None, l2=0.0).passed()


def test_softmax_stable():
    assert np.allclose(softmax(np.array([1000.0, 1000.0])), 0.5)


def test_init_zeroes_pad_and_copies():
    emb = np.ones((4, 3))
    p = init_params(emb, 2, (2,), 2, np.random.default_rng(0))
    assert not p.embeddings[0].any() and emb[0].all()
    assert not p.out_b.any() and not p.conv_b[0].any()
