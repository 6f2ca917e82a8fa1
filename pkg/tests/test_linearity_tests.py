import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from superlinear import (ExperimentSummary, OrderingPolicy, ValidationError, apply_ordering,
                         chi2_linearity_test, delta_f_article, delta_f_single, fisher_combine,
                         normalized_deviation)
from superlinear.linearity_tests import apply_ordering_article

from oracles import mp_f_cdf

unit_p = st.floats(1e-12, 1.0)


class TestChi2Article:
    def test_two_df_closed_form(self):
        t = 0.2107210
        res = chi2_linearity_test([math.sqrt(t), 0.0])
        assert res.p_value == pytest.approx(-math.expm1(-t / 2), rel=1e-12)
        assert res.p_value == pytest.approx(0.1, abs=1e-6)
        assert res.tail == "left" and res.df == (2,) and res.method == "chi2-article"

    def test_reports_both_tails(self):
        res = chi2_linearity_test([0.3, -1.2, 2.0])
        assert res.p_value + res.p_other_tail == pytest.approx(1.0, abs=1e-15)

    def test_linear_article_has_zero_p(self):
        assert chi2_linearity_test([0.0, 0.0, 0.0]).p_value == 0.0

    def test_empty(self):
        with pytest.raises(ValidationError):
            chi2_linearity_test([])


class TestDeltaF:
    def test_equal_sds_example(self):
        res = delta_f_single(ExperimentSummary("a", (1, 2, 3.6), (1, 1, 1), 10))
        assert res.statistic == pytest.approx(0.6, abs=1e-12)
        assert res.df == (1, 27) and res.tail == "left"

    def test_unequal_sds_example(self):
        res = delta_f_single(ExperimentSummary("b", (1.0, 2.0, 3.5), (1, 2, 1), 24))
        assert res.statistic == pytest.approx(0.5, abs=1e-12)
        assert res.df == (1, 69)
        assert res.p_value == pytest.approx(mp_f_cdf(0.5, 1, 69), rel=1e-11)

    def test_linear_means(self):
        res = delta_f_single(ExperimentSummary("c", (1, 2, 3), (1, 1, 1), 10))
        assert res.statistic == 0.0 and res.p_value == 0.0

    def test_unbalanced_pools_by_degrees_of_freedom(self):
        e = ExperimentSummary("u", (1.0, 2.0, 3.3), (1.0, 2.0, 1.5), (10, 20, 30))
        ss_dev = 0.3 ** 2 / (1 / 10 + 4 / 20 + 1 / 30)
        ms_w = (9 * 1.0 + 19 * 4.0 + 29 * 2.25) / 57
        assert delta_f_single(e).statistic == pytest.approx(ss_dev / ms_w, rel=1e-13)

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10), st.integers(2, 300))
    def test_equal_sds_identity(self, m1, m2, m3, s, n):
        e = ExperimentSummary("i", (m1, m2, m3), (s, s, s), n)
        assert delta_f_single(e).statistic == pytest.approx(normalized_deviation(e).z_tilde ** 2,
                                                           rel=1e-12, abs=1e-300)

    def test_null_p_values_are_uniform(self, rng):
        # exact F under independence and linear true means: p is U(0, 1)
        ps = []
        for _ in range(2000):
            raw = rng.normal(size=(3, 12)) + np.array([[0.0], [1.0], [2.0]])
            e = ExperimentSummary("s", raw.mean(axis=1), raw.std(axis=1, ddof=1), 12)
            ps.append(delta_f_single(e).p_value)
        assert stats.kstest(ps, "uniform").pvalue > 0.001


class TestFisher:
    def test_two_p_values(self):
        res = fisher_combine([0.1, 0.1])
        x = -4 * math.log(0.1)
        assert res.statistic == pytest.approx(9.210340, abs=1e-6)
        assert res.p_value == pytest.approx(math.exp(-x / 2) * (1 + x / 2), rel=1e-13)
        assert res.df == (4,) and res.tail == "right"

    @given(unit_p)
    def test_single_p_is_identity(self, p):
        assert fisher_combine([p]).p_value == pytest.approx(p, rel=1e-12)

    def test_all_ones(self):
        res = fisher_combine([1.0, 1.0])
        assert res.p_value == 1.0 and res.statistic == 0.0 and math.copysign(1, res.statistic) == 1

    def test_zero_is_a_log_singularity(self):
        res = fisher_combine([0.3, 0.0])
        assert res.p_value == 0.0 and "log-singularity" in res.flags

    @pytest.mark.parametrize("bad", [[], [1.2], [-0.1]])
    def test_invalid(self, bad):
        with pytest.raises(ValidationError):
            fisher_combine(bad)

    @given(st.lists(unit_p, min_size=1, max_size=8), st.randoms())
    def test_permutation_invariant(self, ps, rnd):
        shuffled = list(ps)
        rnd.shuffle(shuffled)
        assert fisher_combine(shuffled).p_value == pytest.approx(fisher_combine(ps).p_value, rel=1e-12)

    @given(st.lists(unit_p, min_size=1, max_size=8), st.integers(0, 7), st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_monotone(self, ps, k, shrink):
        k %= len(ps)
        lowered = list(ps)
        lowered[k] = ps[k] * shrink
        assert fisher_combine(lowered).p_value <= fisher_combine(ps).p_value + 1e-15

    def test_article(self, article):
        res = delta_f_article(article)
        expected = fisher_combine([delta_f_single(e).p_value for e in article.experiments])
        assert res == expected and res.method == "deltaF-fisher-article"


class TestOrdering:
    def test_parse_forms(self):
        assert OrderingPolicy.parse("as-reported").kind == "as-reported"
        assert OrderingPolicy.parse("increasing").kind == "increasing-means"
        p = OrderingPolicy.parse("exclude:e1, e3")
        assert p.excluded_ids == ("e1", "e3") and str(p) == "exclude:e1,e3"
        with pytest.raises(ValidationError):
            OrderingPolicy.parse("sideways")

    def test_increasing_carries_sds_and_cells(self):
        e = ExperimentSummary("o", (3.0, 1.0, 2.0), (0.3, 0.1, 0.2), (30, 10, 20))
        out = apply_ordering(e, OrderingPolicy("increasing-means"))
        assert out.means == (1.0, 2.0, 3.0)
        assert out.sds == (0.1, 0.2, 0.3) and out.cell_sizes == (10, 20, 30)

    def test_as_reported_is_identity(self, article):
        assert apply_ordering_article(article.experiments, OrderingPolicy()) == list(article.experiments)

    def test_exclude(self, article):
        kept = apply_ordering_article(article.experiments, OrderingPolicy.parse("exclude:e2"))
        assert [e.id for e in kept] == ["e1", "e3"]
        with pytest.raises(ValidationError, match="unknown"):
            apply_ordering_article(article.experiments, OrderingPolicy.parse("exclude:nope"))
