import numpy as np
import pytest

from sharecoord.errors import ConfigError, UndefinedSimilarityError
from sharecoord.matrix import SparseBinaryMatrix, cosine, knn_graph

from conftest import as_sparse, brute_force_knn, random_binary_matrix


def graph_as_dict(g):
    return {(int(u), int(v)): float(c) for u, v, c in zip(g.u, g.v, g.cosine)}


class TestCosine:
    def test_identical_supports(self):
        m = SparseBinaryMatrix.from_rows([[0, 1, 2, 3], [0, 1, 2, 3]], 5)
        assert cosine(0, 1, m) == 1.0

    def test_disjoint_supports(self):
        m = SparseBinaryMatrix.from_rows([[0, 1], [2, 3]], 4)
        assert cosine(0, 1, m) == 0.0

    def test_partial_overlap(self):
        # |S_u|=4, |S_v|=9, overlap 3 -> 3/sqrt(36) = 0.5
        m = SparseBinaryMatrix.from_rows([range(4), range(1, 10)], 12)
        assert cosine(0, 1, m) == 0.5

    def test_zero_support_errors(self):
        m = SparseBinaryMatrix.from_rows([[0], []], 2)
        with pytest.raises(UndefinedSimilarityError):
            cosine(0, 1, m)

    def test_symmetry_and_bounds(self, rng):
        dense = random_binary_matrix(rng, 20, 30, density=0.2)
        m = as_sparse(dense)
        for _ in range(50):
            u, v = rng.choice(20, size=2, replace=False)
            c_uv = cosine(int(u), int(v), m)
            assert c_uv == cosine(int(v), int(u), m)
            assert 0.0 <= c_uv <= 1.0

    def test_matches_dense_dot_product(self, rng):
        dense = random_binary_matrix(rng, 15, 25, density=0.25).astype(float)
        m = as_sparse(dense.astype(int))
        for u in range(15):
            for v in range(u + 1, 15):
                expected = dense[u] @ dense[v] / np.sqrt(dense[u].sum() * dense[v].sum())
                assert cosine(u, v, m) == pytest.approx(expected, abs=1e-12)


class TestKnnGraph:
    def test_two_identical_users(self):
        m = SparseBinaryMatrix.from_rows([[0, 1], [0, 1]], 3)
        g = knn_graph(m, k=1)
        assert graph_as_dict(g) == {(0, 1): 1.0}

    def test_four_user_example(self):
        # supports {t1,t2}, {t1,t2}, {t3}, {t3,t4}; brute force of all 6
        # pairwise cosines gives edges (0,1)=1.0 and (2,3)=1/sqrt(2)
        m = SparseBinaryMatrix.from_rows([[0, 1], [0, 1], [2], [2, 3]], 4)
        g = knn_graph(m, k=1)
        expected = {(0, 1): 1.0, (2, 3): 1 / np.sqrt(2)}
        got = graph_as_dict(g)
        assert set(got) == set(expected)
        for key in expected:
            assert got[key] == pytest.approx(expected[key], abs=1e-15)

    def test_zero_cosine_never_selected(self):
        m = SparseBinaryMatrix.from_rows([[0], [1], [2, 3], [3]], 4)
        g = knn_graph(m, k=3)
        assert graph_as_dict(g) == {(2, 3): pytest.approx(1 / np.sqrt(2))}

    def test_k_too_large(self):
        m = SparseBinaryMatrix.from_rows([[0], [0]], 1)
        with pytest.raises(ConfigError):
            knn_graph(m, k=2)

    def test_each_node_with_positive_neighbor_has_degree(self, rng):
        dense = random_binary_matrix(rng, 40, 25, density=0.15)
        m = as_sparse(dense)
        g = knn_graph(m, k=3)
        counts = dense @ dense.T
        np.fill_diagonal(counts, 0)
        deg = g.degrees()
        for i in range(40):
            if counts[i].max() > 0:
                assert deg[i] >= 1

    def test_edge_count_bound(self, rng):
        dense = random_binary_matrix(rng, 30, 20, density=0.2)
        g = knn_graph(as_sparse(dense), k=3)
        assert g.n_edges <= 30 * 3

    @pytest.mark.parametrize("seed", range(8))
    def test_oracle_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 60))
        m_cols = int(rng.integers(5, 80))
        k = int(rng.integers(1, 5))
        dense = random_binary_matrix(rng, n, m_cols, density=float(rng.uniform(0.05, 0.4)))
        g = knn_graph(as_sparse(dense), k=min(k, n - 1))
        expected = brute_force_knn(dense, min(k, n - 1))
        got = graph_as_dict(g)
        assert set(got) == set(expected)
        for key, cos_val in expected.items():
            assert abs(got[key] - cos_val) <= 1e-12

    def test_threads_do_not_change_result(self, rng):
        dense = random_binary_matrix(rng, 600, 100, density=0.08)
        m = as_sparse(dense)
        g1 = knn_graph(m, k=3, threads=1)
        g8 = knn_graph(m, k=3, threads=8)
        assert np.array_equal(g1.u, g8.u)
        assert np.array_equal(g1.v, g8.v)
        assert np.array_equal(g1.cosine, g8.cosine)


class TestSparseBinaryMatrix:
    def test_supports_roundtrip(self):
        m = SparseBinaryMatrix.from_rows([[2, 0], [1]], 3)
        assert m.row_support(0).tolist() == [0, 2]
        assert m.col_support(1).tolist() == [1]
        assert m.row_sizes.tolist() == [2, 1]
        assert m.col_sizes.tolist() == [1, 1, 1]

    def test_row_and_column_views_agree(self, rng):
        dense = random_binary_matrix(rng, 12, 9, density=0.3)
        m = as_sparse(dense)
        from_rows = {(i, int(j)) for i in range(12) for j in m.row_support(i)}
        from_cols = {(int(i), j) for j in range(9) for i in m.col_support(j)}
        assert from_rows == from_cols
