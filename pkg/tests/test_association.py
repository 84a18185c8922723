import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2 as chi2_dist

from sharecoord.association import (
    ContingencyTable,
    chi2_1df_upper_quantile,
    _chi2_1df_isf_bisect,
    contingency,
    critical_phi,
    edge_contingencies,
    phi,
    phi_cell_product,
    score_graph,
)
from sharecoord.errors import ConfigError, DataError
from sharecoord.matrix import SparseBinaryMatrix, knn_graph

from conftest import as_sparse, chi_squared_expected_counts, random_binary_matrix


class TestContingency:
    def test_hand_enumerated(self):
        # S1={t1,t2,t3}, S2={t2,t3,t4} over 10 tweets -> (2,1,1,6)
        m = SparseBinaryMatrix.from_rows([[0, 1, 2], [1, 2, 3]], 10)
        t = contingency(0, 1, m)
        assert (t.a, t.b, t.c, t.d) == (2, 1, 1, 6)

    def test_identical_supports(self):
        m = SparseBinaryMatrix.from_rows([range(5), range(5)], 12)
        t = contingency(0, 1, m)
        assert (t.a, t.b, t.c, t.d) == (5, 0, 0, 7)

    def test_disjoint_supports(self):
        m = SparseBinaryMatrix.from_rows([[0, 1], [2, 3, 4]], 5)
        t = contingency(0, 1, m)
        assert (t.a, t.b, t.c, t.d) == (0, 2, 3, 0)

    def test_self_comparison(self):
        m = SparseBinaryMatrix.from_rows([[0], [1]], 2)
        with pytest.raises(DataError):
            contingency(1, 1, m)

    def test_marginal_invariants(self, rng):
        dense = random_binary_matrix(rng, 10, 20, density=0.3)
        m = as_sparse(dense)
        for u in range(10):
            for v in range(u + 1, 10):
                t = contingency(u, v, m)
                assert t.a + t.b == dense[u].sum()
                assert t.a + t.c == dense[v].sum()
                assert t.n == 20


class TestPhi:
    def test_worked_example_against_chi2_oracle(self):
        t = ContingencyTable(2, 1, 1, 6)
        score = phi(t)
        assert score.value == pytest.approx(11 / 21, abs=1e-15)
        oracle = chi_squared_expected_counts(2, 1, 1, 6)
        assert score.chi_squared == pytest.approx(oracle, rel=1e-12)
        assert math.sqrt(score.chi_squared / t.n) == pytest.approx(score.value, abs=1e-12)

    def test_perfect_association(self):
        assert phi(ContingencyTable(5, 0, 0, 5)).value == 1.0

    def test_exact_independence(self):
        assert phi(ContingencyTable(1, 1, 1, 1)).value == 0.0

    def test_monotone_anchors(self):
        for x, y in [(1, 1), (3, 7), (10, 2)]:
            assert phi(ContingencyTable(x, 0, 0, y)).value == 1.0
        for x in (1, 2, 9):
            assert phi(ContingencyTable(x, x, x, x)).value == 0.0

    def test_zero_marginal_is_undefined(self):
        score = phi(ContingencyTable(3, 0, 4, 0))  # b+d == 0... a+b=3, c+d=4, a+c=7, b+d=0
        assert score.value is None and score.chi_squared is None
        assert not score.defined

    def test_cell_product_variant(self):
        t = ContingencyTable(2, 1, 1, 6)
        assert phi_cell_product(t) == pytest.approx(11 / math.sqrt(12), abs=1e-12)
        # undefined at any zero cell, including perfect association
        assert phi_cell_product(ContingencyTable(5, 0, 0, 5)) is None

    def test_identity_on_random_tables(self, rng):
        # acceptance-level property at a smaller count; see test_acceptance
        for _ in range(200):
            a, b, c, d = (int(x) for x in rng.integers(0, 200, size=4))
            t = ContingencyTable(a, b, c, d)
            score = phi(t)
            if min(t.marginals()) == 0:
                assert score.value is None
                continue
            assert abs(score.value**2 * t.n - score.chi_squared) <= 1e-10 * max(
                score.chi_squared, 1e-300
            )
            oracle = chi_squared_expected_counts(a, b, c, d)
            assert score.chi_squared == pytest.approx(oracle, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    a=st.integers(0, 10_000),
    b=st.integers(0, 10_000),
    c=st.integers(0, 10_000),
    d=st.integers(0, 10_000),
)
def test_phi_range_and_identity(a, b, c, d):
    t = ContingencyTable(a, b, c, d)
    score = phi(t)
    if min(t.marginals()) == 0:
        assert score.value is None
    else:
        assert 0.0 <= score.value <= 1.0
        assert abs(score.value**2 * t.n - score.chi_squared) <= 1e-10 * max(score.chi_squared, 1e-300)


class TestScoreGraph:
    def test_two_identical_rows(self):
        m = SparseBinaryMatrix.from_rows([[0, 1], [0, 1]], 10)
        g = score_graph(knn_graph(m, k=1), m)
        assert g.phi[0] == pytest.approx(1.0, abs=1e-15)

    def test_worked_pair(self):
        m = SparseBinaryMatrix.from_rows([[0, 1, 2], [1, 2, 3]], 10)
        g = score_graph(knn_graph(m, k=1), m)
        assert g.phi[0] == pytest.approx(11 / 21, abs=1e-12)

    def test_symmetry_with_scalar_path(self, rng):
        dense = random_binary_matrix(rng, 25, 40, density=0.2)
        m = as_sparse(dense)
        g = score_graph(knn_graph(m, k=3), m)
        for idx in range(g.n_edges):
            u, v = int(g.u[idx]), int(g.v[idx])
            forward = phi(contingency(u, v, m))
            backward = phi(contingency(v, u, m))
            if forward.value is None:
                assert backward.value is None and np.isnan(g.phi[idx])
            else:
                assert forward.value == backward.value
                assert g.phi[idx] == pytest.approx(forward.value, abs=1e-12)

    def test_dimension_mismatch(self):
        m = SparseBinaryMatrix.from_rows([[0, 1], [0, 1]], 3)
        other = SparseBinaryMatrix.from_rows([[0], [1], [0, 1]], 2)
        g = knn_graph(m, k=1)
        with pytest.raises(DataError):
            score_graph(g, other)

    def test_edge_contingencies_match_scalar(self, rng):
        dense = random_binary_matrix(rng, 15, 25, density=0.25)
        m = as_sparse(dense)
        g = knn_graph(m, k=2)
        a, b, c, d = edge_contingencies(g, m)
        for idx in range(g.n_edges):
            t = contingency(int(g.u[idx]), int(g.v[idx]), m)
            assert (a[idx], b[idx], c[idx], d[idx]) == (t.a, t.b, t.c, t.d)


class TestCriticalPhi:
    def test_single_comparison(self):
        # chi2_1 0.95 quantile = 3.8415 -> sqrt(3.8415/1000) ~ 0.06198
        got = critical_phi(0.05, 1, 1000)
        assert got == pytest.approx(math.sqrt(3.841458820694124 / 1000), rel=1e-9)

    def test_alpha_to_one_limit(self):
        assert chi2_1df_upper_quantile(1.0) == 0.0
        assert critical_phi(0.999999999, 1, 100) < 1e-4

    def test_against_scipy_oracle(self):
        for alpha in (0.1, 0.01, 0.0001, 1e-7):
            for m_comp in (1, 37, 109_118):
                got = critical_phi(alpha, m_comp, 12345)
                # isf avoids 1-alpha cancellation in the oracle itself
                q = chi2_dist.isf(alpha / m_comp, df=1)
                assert got == pytest.approx(math.sqrt(q / 12345), rel=1e-9)

    def test_bisection_fallback_agrees(self):
        for tail in (0.5, 0.05, 1e-6, 1e-12):
            closed = chi2_1df_upper_quantile(tail)
            bisected = _chi2_1df_isf_bisect(tail)
            assert bisected == pytest.approx(closed, rel=1e-9)

    def test_invalid_arguments(self):
        with pytest.raises(ConfigError):
            critical_phi(0.0, 1, 10)
        with pytest.raises(ConfigError):
            critical_phi(0.05, 0, 10)
        with pytest.raises(ConfigError):
            critical_phi(0.05, 1, 0)
