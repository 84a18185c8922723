"""Shared helpers: independent oracles the implementation is checked against."""

from __future__ import annotations

import numpy as np
import pytest

from sharecoord.matrix import SparseBinaryMatrix


def random_binary_matrix(rng, n_rows, n_cols, density=0.1) -> np.ndarray:
    """Dense random 0/1 matrix with every row non-empty."""
    dense = (rng.random((n_rows, n_cols)) < density).astype(np.int64)
    for i in np.flatnonzero(dense.sum(axis=1) == 0):
        dense[i, rng.integers(n_cols)] = 1
    return dense


def as_sparse(dense: np.ndarray) -> SparseBinaryMatrix:
    from scipy import sparse

    return SparseBinaryMatrix(sparse.csr_array(dense))


def brute_force_knn(dense: np.ndarray, k: int) -> dict[tuple[int, int], float]:
    """All-pairs O(n^2) k-NN oracle with the same tie-breaking contract.

    Independent of the package implementation: dense integer dot products,
    per-row sort by (-cosine, index), positive-cosine neighbors only.
    """
    n = dense.shape[0]
    counts = dense @ dense.T
    sizes = dense.sum(axis=1)
    edges: dict[tuple[int, int], float] = {}
    for i in range(n):
        cands = []
        for j in range(n):
            if j == i or counts[i, j] == 0:
                continue
            cos = counts[i, j] / np.sqrt(sizes[i] * sizes[j])
            cands.append((-cos, j))
        cands.sort()
        for neg_cos, j in cands[:k]:
            key = (min(i, j), max(i, j))
            edges.setdefault(key, -neg_cos)
    return edges


def bfs_components(n_nodes: int, pairs) -> list[set[int]]:
    """Connected components by breadth-first search (oracle for union-find)."""
    adj: dict[int, list[int]] = {i: [] for i in range(n_nodes)}
    for u, v in pairs:
        adj[int(u)].append(int(v))
        adj[int(v)].append(int(u))
    seen = [False] * n_nodes
    comps = []
    for start in range(n_nodes):
        if seen[start]:
            continue
        comp = {start}
        seen[start] = True
        frontier = [start]
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.add(y)
                        nxt.append(y)
            frontier = nxt
        comps.append(comp)
    return comps


def chi_squared_expected_counts(a, b, c, d) -> float:
    """Chi-squared oracle from the textbook observed-vs-expected formula."""
    obs = np.array([[a, b], [c, d]], dtype=np.float64)
    n = obs.sum()
    row = obs.sum(axis=1)
    col = obs.sum(axis=0)
    chi2 = 0.0
    for i in range(2):
        for j in range(2):
            exp = row[i] * col[j] / n
            chi2 += (obs[i, j] - exp) ** 2 / exp
    return chi2


def dense_centered(dense: np.ndarray) -> np.ndarray:
    """Dense deviation matrix oracle: obs - outer(row, col) / total."""
    dense = np.asarray(dense, dtype=np.float64)
    rows = dense.sum(axis=1)
    cols = dense.sum(axis=0)
    total = dense.sum()
    return dense - np.outer(rows, cols) / total


@pytest.fixture
def rng():
    return np.random.default_rng(20221108)
