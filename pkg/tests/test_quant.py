import numpy as np
import pytest
from hypothesis import given, strategies as st

from sccnn.corpus import DataError, Dataset, Scale, Tweet
from sccnn.metrics import SentimentDistribution, kld
from sccnn.quant import (TopicGroup, classify_and_count, evaluate_quant, format_distributions,
                         gold_distribution, parse_distributions, topic_groups, write_distributions)

METRICS = ["KLD", "AE", "RAE", "EMD"]


class Fixed:
    """Predicts labels from a lookup keyed by tweet id."""

    def __init__(self, scale, table):
        self.scale = scale
        self.table = table

    def predict(self, tweets):
        return [self.table[t.id] for t in tweets]


class Oracle:
    def __init__(self, scale):
        self.scale = scale

    def predict(self, tweets):
        return [t.label for t in tweets]


def tweets(topic, labels, prefix="t"):
    return [Tweet(f"{prefix}{topic}{i}", "x", lab, topic) for i, lab in enumerate(labels)]


class TestTopicGroup:
    def test_empty(self):
        with pytest.raises(DataError):
            TopicGroup("a", [])

    def test_wrong_topic(self):
        with pytest.raises(DataError):
            TopicGroup("a", tweets("b", [0]))

    def test_groups_from_dataset(self):
        d = Dataset(Scale.TWO, tweets("a", [0, 1]) + tweets("b", [1]))
        assert [(g.topic, len(g.tweets)) for g in topic_groups(d)] == [("a", 2), ("b", 1)]


class TestGold:
    def test_two(self):
        assert list(gold_distribution(TopicGroup("a", tweets("a", [1, 1])), Scale.TWO).p) == [0, 1]

    def test_five(self):
        p = gold_distribution(TopicGroup("a", tweets("a", [0, 4])), Scale.FIVE).p
        assert list(p) == [0.5, 0, 0, 0, 0.5]

    def test_unlabeled(self):
        with pytest.raises(DataError):
            gold_distribution(TopicGroup("a", [Tweet("1", "x", None, "a")]), Scale.TWO)


class TestClassifyAndCount:
    def test_all_positive(self):
        g = TopicGroup("a", tweets("a", [0, 0, 1, 0]))
        model = Fixed(Scale.TWO, {t.id: 1 for t in g.tweets})
        assert list(classify_and_count([g], model)["a"].p) == [0, 1]

    def test_counts(self):
        g = TopicGroup("a", tweets("a", [0, 0, 0, 0]))
        model = Fixed(Scale.THREE, dict(zip([t.id for t in g.tweets], [0, 1, 2, 2])))
        assert list(classify_and_count([g], model)["a"].p) == [0.25, 0.25, 0.5]

    def test_scale_mismatch(self):
        g = TopicGroup("a", tweets("a", [0]))
        with pytest.raises(DataError):
            classify_and_count([g], Oracle(Scale.TWO), Scale.THREE)

    @given(st.lists(st.integers(0, 4), min_size=1, max_size=30), st.lists(st.integers(0, 4), min_size=30,
                                                                           max_size=30), st.randoms())
    def test_equals_gold_of_predictions_and_permutation(self, labels, preds, rnd):
        ts = tweets("a", labels)
        table = {t.id: p for t, p in zip(ts, preds)}
        dist = classify_and_count([TopicGroup("a", ts)], Fixed(Scale.FIVE, table))["a"]
        relabeled = [Tweet(t.id, t.text, table[t.id], t.topic) for t in ts]
        assert np.array_equal(dist.p, gold_distribution(TopicGroup("a", relabeled), Scale.FIVE).p)
        assert abs(dist.p.sum() - 1) < 1e-12
        rnd.shuffle(ts)
        again = classify_and_count([TopicGroup("a", ts)], Fixed(Scale.FIVE, table))["a"]
        assert np.allclose(again.p, dist.p, rtol=0, atol=1e-15)


class TestEvaluate:
    def setup_method(self):
        self.d = Dataset(Scale.FIVE, tweets("a", [0, 1, 4]) + tweets("b", [2, 2, 3, 0]))
        self.groups = topic_groups(self.d)
        self.gold = {g.topic: gold_distribution(g, Scale.FIVE) for g in self.groups}
        self.sizes = {g.topic: len(g.tweets) for g in self.groups}

    @pytest.mark.parametrize("metric", METRICS)
    def test_perfect_classifier(self, metric):
        pred = classify_and_count(self.groups, Oracle(Scale.FIVE))
        assert evaluate_quant(self.gold, pred, metric, self.sizes) == pytest.approx(0.0, abs=1e-15)

    def test_uniform_mean(self):
        pred = classify_and_count(self.groups, Fixed(Scale.FIVE, {t.id: 2 for t in self.d}))
        a = kld(self.gold["a"], pred["a"], 3)
        b = kld(self.gold["b"], pred["b"], 4)
        assert evaluate_quant(self.gold, pred, "KLD", self.sizes) == pytest.approx((a + b) / 2, abs=1e-15)

    def test_single_topic(self):
        pred = {"a": SentimentDistribution(Scale.FIVE, [0.2] * 5)}
        one = evaluate_quant({"a": self.gold["a"]}, pred, "AE", self.sizes)
        assert one == pytest.approx(np.mean(np.abs(self.gold["a"].p - 0.2)), abs=1e-15)

    def test_topic_mismatch_lists_difference(self):
        with pytest.raises(DataError, match=r"missing predictions \['b'\]"):
            evaluate_quant(self.gold, {"a": self.gold["a"]}, "AE", self.sizes)

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            evaluate_quant(self.gold, self.gold, "MSE", self.sizes)


def test_distribution_file_round_trip(tmp_path):
    dists = {"x y": SentimentDistribution(Scale.THREE, [0.25, 0.25, 0.5]),
             "#z": SentimentDistribution(Scale.THREE, [1 / 3, 1 / 3, 1 / 3])}
    text = format_distributions(dists)
    assert text.splitlines()[0] == "x y\t0.250000\t0.250000\t0.500000"
    back = parse_distributions(text, Scale.THREE)
    assert list(back) == ["x y", "#z"]
    assert np.allclose(back["#z"].p, 1 / 3, atol=1e-6)
    write_distributions(dists, tmp_path / "d.tsv")
    assert (tmp_path / "d.tsv").read_text(encoding="utf-8") == text
    with pytest.raises(DataError):
        parse_distributions("a\t0.5\n", Scale.THREE)
