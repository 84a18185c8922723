"""Sparse binary matrix kernels: row supports, cosine similarity, exact k-NN.

The k-nearest-neighbor search is exact: co-occurrence counts between a block
of rows and all other rows are accumulated through the column (inverted)
index via a blocked sparse product, then converted to cosines.  No
approximate index is involved, so results can be checked against a
brute-force all-pairs construction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .errors import ConfigError, DataError, UndefinedSimilarityError

_KNN_BLOCK_ROWS = 512


class SparseBinaryMatrix:
    """Immutable 0/1 matrix exposing row supports and the inverted column index."""

    def __init__(self, csr: sparse.csr_array):
        csr = sparse.csr_array(csr)
        if csr.nnz and not np.all(csr.data == 1):
            raise DataError("matrix entries must be 0/1")
        csr.sort_indices()
        self._csr = csr
        self._csc = csr.tocsc()
        self._row_sizes = np.diff(csr.indptr).astype(np.int64)

    @classmethod
    def from_rows(cls, rows, n_cols: int) -> "SparseBinaryMatrix":
        """Build from an iterable of per-row column-index collections."""
        indptr = [0]
        indices: list[int] = []
        for cols in rows:
            cols = sorted(set(int(c) for c in cols))
            if cols and (cols[0] < 0 or cols[-1] >= n_cols):
                raise DataError("column index out of range")
            indices.extend(cols)
            indptr.append(len(indices))
        csr = sparse.csr_array(
            (
                np.ones(len(indices), dtype=np.int32),
                np.asarray(indices, dtype=np.int64),
                np.asarray(indptr, dtype=np.int64),
            ),
            shape=(len(indptr) - 1, n_cols),
        )
        return cls(csr)

    @property
    def n_rows(self) -> int:
        return self._csr.shape[0]

    @property
    def n_cols(self) -> int:
        return self._csr.shape[1]

    @property
    def row_sizes(self) -> np.ndarray:
        """Number of entries per row (user activity)."""
        return self._row_sizes

    @property
    def col_sizes(self) -> np.ndarray:
        """Number of entries per column (tweet audience)."""
        return np.diff(self._csc.indptr).astype(np.int64)

    def row_support(self, i: int) -> np.ndarray:
        """Sorted column indices of row ``i``."""
        return self._csr.indices[self._csr.indptr[i] : self._csr.indptr[i + 1]]

    def col_support(self, j: int) -> np.ndarray:
        """Sorted row indices of column ``j`` (the inverted index)."""
        return self._csc.indices[self._csc.indptr[j] : self._csc.indptr[j + 1]]

    def tocsr(self) -> sparse.csr_array:
        return self._csr


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected union of each row's k highest-cosine neighbors.

    Edges are stored as parallel arrays with ``u[i] < v[i]``, sorted
    lexicographically.  ``phi`` is NaN-filled until the graph is scored;
    NaN marks pairs whose association is undefined (a zero marginal).
    """

    n_nodes: int
    k: int
    u: np.ndarray
    v: np.ndarray
    cosine: np.ndarray
    phi: np.ndarray | None = None

    @property
    def n_edges(self) -> int:
        return len(self.u)

    def with_phi(self, phi: np.ndarray) -> "NeighborGraph":
        return replace(self, phi=phi)

    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.u, minlength=self.n_nodes)
        deg += np.bincount(self.v, minlength=self.n_nodes)
        return deg

    def defined_phi_mask(self) -> np.ndarray:
        if self.phi is None:
            raise DataError("graph has not been phi-scored")
        return ~np.isnan(self.phi)


def cosine(u: int, v: int, m: SparseBinaryMatrix) -> float:
    """Cosine similarity between binary rows: |S_u & S_v| / sqrt(|S_u|*|S_v|)."""
    su = m.row_support(u)
    sv = m.row_support(v)
    if len(su) == 0 or len(sv) == 0:
        raise UndefinedSimilarityError(f"row {u if len(su) == 0 else v} has empty support")
    overlap = len(np.intersect1d(su, sv, assume_unique=True))
    return overlap / math.sqrt(len(su) * len(sv))


def _block_neighbors(m: SparseBinaryMatrix, k: int, start: int, stop: int):
    """Directed k-NN choices for rows [start, stop): (rows, neighbors, cosines)."""
    csr = m.tocsr()
    sizes = m.row_sizes
    counts = csr[start:stop] @ csr.T  # co-occurrence via the inverted index
    counts = sparse.csr_array(counts)
    rows_out: list[np.ndarray] = []
    nbrs_out: list[np.ndarray] = []
    cos_out: list[np.ndarray] = []
    indptr, indices, data = counts.indptr, counts.indices, counts.data
    for local, row in enumerate(range(start, stop)):
        cand = indices[indptr[local] : indptr[local + 1]]
        cnt = data[indptr[local] : indptr[local + 1]]
        keep = cand != row
        cand = cand[keep]
        cnt = cnt[keep]
        if cand.size == 0:
            continue
        cos = cnt / np.sqrt(sizes[row] * sizes[cand])
        # highest cosine first; ties broken by ascending row index
        order = np.lexsort((cand, -cos))[: min(k, cand.size)]
        rows_out.append(np.full(len(order), row, dtype=np.int64))
        nbrs_out.append(cand[order].astype(np.int64))
        cos_out.append(cos[order])
    if not rows_out:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0, dtype=np.float64)
    return np.concatenate(rows_out), np.concatenate(nbrs_out), np.concatenate(cos_out)


def knn_graph(m: SparseBinaryMatrix, k: int = 3, threads: int = 1) -> NeighborGraph:
    """Exact k-nearest-neighbor graph over rows by cosine similarity.

    Each row selects its ``k`` highest-cosine other rows (ties broken by
    ascending row index); zero-cosine rows are never selected, so rows may
    contribute fewer than ``k`` choices.  Directed choices are merged into an
    undirected edge set.  ``threads`` only parallelizes row blocks; the
    result is identical for any thread count.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    if k >= m.n_rows:
        raise ConfigError(f"k={k} must be smaller than the number of rows ({m.n_rows})")
    if np.any(m.row_sizes == 0):
        raise UndefinedSimilarityError("every row must have nonzero support")

    starts = list(range(0, m.n_rows, _KNN_BLOCK_ROWS))
    blocks = [(s, min(s + _KNN_BLOCK_ROWS, m.n_rows)) for s in starts]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda b: _block_neighbors(m, k, *b), blocks))
    else:
        results = [_block_neighbors(m, k, *b) for b in blocks]

    rows = np.concatenate([r[0] for r in results])
    nbrs = np.concatenate([r[1] for r in results])
    cos = np.concatenate([r[2] for r in results])

    u = np.minimum(rows, nbrs)
    v = np.maximum(rows, nbrs)
    # dedupe the two directions; cosines agree bitwise, keep first occurrence
    pair_keys = u * m.n_rows + v
    _, first = np.unique(pair_keys, return_index=True)
    order = first[np.lexsort((v[first], u[first]))]
    return NeighborGraph(
        n_nodes=m.n_rows, k=k, u=u[order], v=v[order], cosine=cos[order]
    )
