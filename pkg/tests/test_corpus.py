import pytest
from hypothesis import given, strategies as st

from sccnn.corpus import (DataError, Dataset, Scale, Tweet, label_counts, merge, parse_dataset,
                          serialize_dataset)


def ds(labels, scale=Scale.THREE, name="d"):
    return Dataset(scale, tuple(Tweet(f"{name}{i}", f"text {i}", lab) for i, lab in enumerate(labels)), name)


class TestScale:
    def test_classes(self):
        assert Scale.TWO.classes == ("negative", "positive")
        assert Scale.THREE.classes == ("negative", "neutral", "positive")
        assert Scale.FIVE.classes == ("-2", "-1", "0", "1", "2")

    def test_ordinal_values(self):
        assert list(Scale.FIVE.ordinal_values) == [-2, -1, 0, 1, 2]
        assert list(Scale.THREE.ordinal_values) == [-1, 0, 1]

    def test_labels_case_insensitive_on_named_scales(self):
        assert Scale.THREE.parse_label("Positive") == 2
        assert Scale.TWO.parse_label("NEGATIVE") == 0

    @pytest.mark.parametrize("scale,token", [(Scale.TWO, "neutral"), (Scale.FIVE, "3"), (Scale.THREE, "-1")])
    def test_unknown_label(self, scale, token):
        with pytest.raises(DataError, match=repr(token)):
            scale.parse_label(token)

    def test_from_points(self):
        assert Scale.from_points("5") is Scale.FIVE
        with pytest.raises(DataError):
            Scale.from_points(4)


class TestParse:
    def test_three_point_line(self):
        d = parse_dataset("17\tpositive\tgood day", Scale.THREE)
        assert d.tweets == (Tweet("17", "good day", 2, None),)

    def test_topic_line(self):
        d = parse_dataset("9\t@acme\t-2\tawful", Scale.FIVE, has_topic=True)
        assert d.tweets[0].topic == "@acme"
        assert d.tweets[0].label == 0

    def test_wrong_column_count(self):
        with pytest.raises(DataError, match="line 1.*columns"):
            parse_dataset("3\tgreat", Scale.THREE)

    def test_error_names_line_number(self):
        with pytest.raises(DataError, match="line 3"):
            parse_dataset("1\tpositive\ta\n# c\n2\tpositive", Scale.THREE)

    def test_unknown_label_named(self):
        with pytest.raises(DataError, match="'happy'"):
            parse_dataset("1\thappy\tx", Scale.THREE)

    def test_duplicate_id(self):
        with pytest.raises(DataError, match="duplicate"):
            parse_dataset("1\tpositive\ta\n1\tnegative\tb", Scale.THREE)

    def test_comments_and_blank_lines_skipped_order_kept(self):
        src = "# header\n\nb\tnegative\tx\n\na\tneutral\ty\n"
        d = parse_dataset(src, Scale.THREE)
        assert [t.id for t in d] == ["b", "a"]

    def test_empty_text_rejected(self):
        with pytest.raises(DataError):
            parse_dataset("1\tpositive\t   ", Scale.THREE)


_text = st.text(st.characters(blacklist_characters="\t\n\r", blacklist_categories=("Cs",)),
                min_size=1).filter(lambda s: s.strip() and not s.startswith("#"))


@given(st.lists(st.tuples(st.sampled_from(Scale.FIVE.classes), _text,
                          st.text("abcxyz@# ", min_size=1)), max_size=20),
       st.booleans())
def test_parse_serialize_roundtrip(rows, has_topic):
    src = "".join(f"id{i}\t" + (f"{topic}\t" if has_topic else "") + f"{lab}\t{text}\n"
                  for i, (lab, text, topic) in enumerate(rows))
    d = parse_dataset(src, Scale.FIVE, has_topic)
    again = parse_dataset(serialize_dataset(d, has_topic), Scale.FIVE, has_topic)
    assert again == d


class TestMerge:
    def test_concatenation(self):
        a, b = ds([0, 1, 2], name="a"), ds([2, 2], name="b")
        m = merge(a, b)
        assert len(m) == 5
        assert m.tweets[:3] == a.tweets

    def test_scale_mismatch(self):
        with pytest.raises(DataError, match="scale"):
            merge(ds([0]), ds([0], Scale.FIVE))

    def test_empty_is_identity(self):
        d = ds([0, 1])
        assert merge(d, Dataset(Scale.THREE, (), "e")) == d

    def test_collision_and_namespacing(self):
        a, b = ds([0, 1], name="x"), ds([2], name="x")
        b = Dataset(Scale.THREE, b.tweets, "y")
        with pytest.raises(DataError, match="collision"):
            merge(a, b)
        m = merge(a, b, namespace=True)
        assert [t.id for t in m] == ["x:x0", "x:x1", "y:x0"]

    @given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
    def test_sizes_add_and_associative(self, i, j, k):
        a, b, c = ds([0] * i, name="a"), ds([1] * j, name="b"), ds([2] * k, name="c")
        left = merge(merge(a, b, namespace=True, name="ab"), c, namespace=True)
        right = merge(a, merge(b, c, namespace=True, name="bc"), namespace=True)
        assert len(left) == len(right) == i + j + k
        assert [t.label for t in left] == [t.label for t in right]
        assert [t.text for t in left] == [t.text for t in right]


class TestLabelCounts:
    def test_counts(self):
        assert list(label_counts(ds([2, 2, 0]))) == [1, 0, 2]

    def test_empty(self):
        assert list(label_counts(ds([]))) == [0, 0, 0]

    def test_single_class(self):
        assert list(label_counts(ds([1] * 100))) == [0, 100, 0]

    def test_unlabeled(self):
        with pytest.raises(DataError):
            label_counts(Dataset(Scale.THREE, (Tweet("1", "x"),)))

    @given(st.lists(st.integers(0, 4), max_size=50))
    def test_sums_to_size(self, labels):
        assert label_counts(ds(labels, Scale.FIVE)).sum() == len(labels)
