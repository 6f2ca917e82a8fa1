import json

import pytest
from hypothesis import given, settings, strategies as st

from superlinear import (ArticleDataset, DegenerateVarianceError, ExperimentSummary, OrderingPolicy,
                         ParseError, ValidationError, ingest, write_datasets)
from superlinear.dataset import CSV_COLUMNS, dumps_csv, dumps_json, parse_csv, parse_json

HEADER = ",".join(CSV_COLUMNS)


def _json(articles):
    return json.dumps({"articles": articles})


class TestArticleDataset:
    def test_rejects_duplicates_and_empty(self):
        e = ExperimentSummary("e", (1, 2, 3), (1, 1, 1), 5)
        with pytest.raises(ValidationError, match="duplicate"):
            ArticleDataset("a", (e, e))
        with pytest.raises(ValidationError, match="empty"):
            ArticleDataset("a", ())


class TestJson:
    def test_minimal(self):
        out = parse_json(_json([{"id": "A", "experiments": [
            {"id": "e1", "n": 10, "means": [1, 2, 3.2], "sds": [1, 1, 1]}]}]))
        assert len(out) == 1 and out[0].experiments[0].cell_sizes == (10, 10, 10)

    def test_ordering_field(self):
        out = parse_json(_json([{"id": "A", "order": "increasing", "experiments": [
            {"id": "e1", "n": [5, 6, 7], "means": [1, 2, 3.2], "sds": [1, 1, 1]}]}]))
        assert out[0].ordering_policy == OrderingPolicy("increasing-means")

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError, match=r"f\.json:2:"):
            parse_json('{"articles":\n  [,]}', source="f.json")

    @pytest.mark.parametrize("exp,field", [
        ({"id": "e", "n": 5, "means": [1, 2], "sds": [1, 1, 1]}, "means"),
        ({"id": "e", "n": 5, "means": [1, 2, 3], "sds": [1, "x", 1]}, r"sds\[1\]"),
        ({"id": "e", "n": [5, 5], "means": [1, 2, 3], "sds": [1, 1, 1]}, r"\.n"),
        ({"id": "e", "n": 5, "means": [1, 2, 3], "sds": [1, 1, -2]}, r"sds\[2\]"),
        ({"id": "e", "means": [1, 2, 3], "sds": [1, 1, 1]}, "missing field"),
    ])
    def test_validation_names_the_field(self, exp, field):
        with pytest.raises(ValidationError, match=field):
            parse_json(_json([{"id": "A", "experiments": [exp]}]))

    def test_duplicate_ids(self):
        exp = {"id": "e", "n": 5, "means": [1, 2, 3.1], "sds": [1, 1, 1]}
        with pytest.raises(ValidationError, match="duplicate experiment"):
            parse_json(_json([{"id": "A", "experiments": [exp, exp]}]))
        with pytest.raises(ValidationError, match="duplicate article"):
            parse_json(_json([{"id": "A", "experiments": [exp]}, {"id": "A", "experiments": [exp]}]))

    def test_empty_experiment_list(self):
        with pytest.raises(ValidationError, match="empty"):
            parse_json(_json([{"id": "A", "experiments": []}]))


class TestCsv:
    def test_rows_group_by_article(self):
        text = "\n".join([HEADER, "A,e1,10,10,10,1,2,3.1,1,1,1", "B,e1,5,6,7,0,1,2.5,1,2,1",
                          "A,e2,10,10,10,1,2,3.3,1,1,1"])
        out = parse_csv(text)
        assert [a.id for a in out] == ["A", "B"]
        assert [e.id for e in out[0].experiments] == ["e1", "e2"]
        assert out[1].experiments[0].cell_sizes == (5, 6, 7)

    def test_zero_sd_names_field_and_line(self):
        text = "\n".join([HEADER, "A,e1,10,10,10,1,2,3,1,1,1", "A,e2,10,10,10,1,2,3,1,0,1"])
        with pytest.raises(ValidationError, match=r"3: field s2"):
            parse_csv(text)

    def test_degenerate_variance_from_model(self):
        e = ExperimentSummary
        with pytest.raises(DegenerateVarianceError):
            e("x", (1, 2, 3), (0, 1, 1), 4)

    @pytest.mark.parametrize("text,match", [
        ("", "empty"),
        ("article_id,experiment_id\nA,e", "missing column"),
        (HEADER + "\nA,e1,10,10,10,1,2,abc,1,1,1", r"2: field m3"),
        (HEADER + "\nA,e1,10,10,10,1,2", r"2: expected 11 fields"),
        (HEADER + "\nA,e1,ten,10,10,1,2,3,1,1,1", r"2: field n1"),
    ])
    def test_parse_errors(self, text, match):
        with pytest.raises(ParseError, match=match):
            parse_csv(text)


finite = st.floats(-1e6, 1e6, allow_nan=False)
positive = st.floats(1e-6, 1e6)
experiment = st.builds(lambda m, s, n: (m, s, n), st.tuples(finite, finite, finite),
                       st.tuples(positive, positive, positive),
                       st.one_of(st.integers(2, 500), st.tuples(*[st.integers(2, 500)] * 3)))


@st.composite
def datasets(draw):
    n_articles = draw(st.integers(1, 3))
    out = []
    for a in range(n_articles):
        exps = draw(st.lists(experiment, min_size=1, max_size=4))
        out.append(ArticleDataset(f"art{a}", tuple(ExperimentSummary(f"e{j}", m, s, n)
                                                   for j, (m, s, n) in enumerate(exps))))
    return out


class TestRoundTrip:
    @given(datasets())
    @settings(max_examples=60)
    def test_json(self, ds):
        assert parse_json(dumps_json(ds)) == ds

    @given(datasets())
    @settings(max_examples=60)
    def test_csv(self, ds):
        assert parse_csv(dumps_csv(ds)) == ds

    def test_files(self, tmp_path, article):
        for name in ("a.json", "a.csv"):
            write_datasets([article], tmp_path / name)
            assert ingest(tmp_path / name) == [article]

    def test_unknown_suffix(self, tmp_path):
        with pytest.raises(ValidationError):
            ingest(tmp_path / "a.txt")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            ingest(tmp_path / "missing.json")
