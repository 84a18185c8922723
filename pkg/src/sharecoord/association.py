"""Contingency tables and phi association scores for neighbor pairs.

For a user pair the 2x2 table counts tweets shared by both (a), only the
first (b), only the second (c), and neither (d), over the full tweet
universe.  The association is the absolute phi coefficient

    phi = |a*d - b*c| / sqrt((a+b)*(c+d)*(a+c)*(b+d))

which satisfies phi = sqrt(chi2 / n) for the 1-d.f. chi-squared statistic of
the same table.  A literal cell-product variant (denominator sqrt(a*b*c*d))
is provided for comparison only; it is undefined whenever any single cell is
empty and does not satisfy the chi-squared identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import erfcinv

from .errors import ConfigError, ConvergenceError, DataError
from .matrix import NeighborGraph, SparseBinaryMatrix


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 joint share counts for a user pair over the tweet universe."""

    a: int  # both shared
    b: int  # first only
    c: int  # second only
    d: int  # neither

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise DataError("contingency counts must be non-negative")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    def marginals(self) -> tuple[int, int, int, int]:
        return (self.a + self.b, self.c + self.d, self.a + self.c, self.b + self.d)


@dataclass(frozen=True)
class PhiScore:
    """Association value in [0, 1] plus the equivalent chi-squared statistic.

    Both fields are None when a marginal of the table is zero, in which case
    the pair is excluded from thresholded analyses rather than coerced.
    """

    value: float | None
    chi_squared: float | None

    @property
    def defined(self) -> bool:
        return self.value is not None


def contingency(u1: int, u2: int, m: SparseBinaryMatrix) -> ContingencyTable:
    """Joint share counts of rows ``u1`` and ``u2`` over all columns of ``m``."""
    if u1 == u2:
        raise DataError(f"self-comparison of row {u1}")
    s1 = m.row_support(u1)
    s2 = m.row_support(u2)
    a = len(np.intersect1d(s1, s2, assume_unique=True))
    b = len(s1) - a
    c = len(s2) - a
    d = m.n_cols - a - b - c
    return ContingencyTable(a, b, c, d)


def phi(t: ContingencyTable) -> PhiScore:
    """Absolute phi coefficient of a 2x2 table (marginal-product denominator).

    Exact integer arithmetic is used for the determinant and the marginal
    product, so ``value**2 * n == chi_squared`` holds to within float
    rounding.
    """
    m1, m2, m3, m4 = t.marginals()
    if min(m1, m2, m3, m4) == 0:
        return PhiScore(None, None)
    det = t.a * t.d - t.b * t.c
    denom_sq = m1 * m2 * m3 * m4
    value = abs(det) / math.sqrt(denom_sq)
    chi_squared = t.n * det * det / denom_sq
    return PhiScore(value, chi_squared)


def phi_cell_product(t: ContingencyTable) -> float | None:
    """Cell-product variant |a*d - b*c| / sqrt(a*b*c*d); comparison only.

    Undefined (None) whenever any single cell is zero, including perfect
    association; prefer :func:`phi` for analysis.
    """
    prod = t.a * t.b * t.c * t.d
    if prod == 0:
        return None
    return abs(t.a * t.d - t.b * t.c) / math.sqrt(prod)


def edge_contingencies(
    g: NeighborGraph, m: SparseBinaryMatrix
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (a, b, c, d) arrays for every edge of the graph."""
    if g.n_nodes != m.n_rows:
        raise DataError(f"graph has {g.n_nodes} nodes but matrix has {m.n_rows} rows")
    if g.n_edges == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy(), empty.copy()
    csr = m.tocsr()
    inter = sparse.csr_array(csr[g.u].multiply(csr[g.v])).sum(axis=1)
    a = np.asarray(inter, dtype=np.int64).ravel()
    sizes = m.row_sizes
    b = sizes[g.u] - a
    c = sizes[g.v] - a
    d = m.n_cols - a - b - c
    return a, b, c, d


def score_graph(g: NeighborGraph, m: SparseBinaryMatrix) -> NeighborGraph:
    """Attach phi scores to every edge of a neighbor graph built from ``m``.

    Undefined associations (a zero marginal) are stored as NaN; those edges
    keep their cosine but are excluded from all phi-thresholded analyses.
    """
    ai, bi, ci, di = edge_contingencies(g, m)
    if g.n_edges == 0:
        return g.with_phi(np.empty(0, dtype=np.float64))
    a = ai.astype(np.float64)
    b = bi.astype(np.float64)
    c = ci.astype(np.float64)
    d = di.astype(np.float64)
    det = a * d - b * c
    m1, m2, m3, m4 = a + b, c + d, a + c, b + d
    denom_sq = m1 * m2 * m3 * m4
    defined = np.minimum(np.minimum(m1, m2), np.minimum(m3, m4)) > 0
    values = np.full(len(a), np.nan)
    np.divide(np.abs(det), np.sqrt(denom_sq), out=values, where=defined)
    return g.with_phi(values)


def _chi2_1df_isf_bisect(tail: float) -> float:
    """Upper-tail chi-squared(1) quantile by bisection on the survival function."""
    sf = lambda x: math.erfc(math.sqrt(x / 2.0))
    hi = 1.0
    while sf(hi) > tail:
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError("chi-squared quantile bisection failed to bracket")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sf(mid) > tail:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


def chi2_1df_upper_quantile(tail: float) -> float:
    """Quantile q with P(chi2_1 >= q) = tail, via the inverse error function.

    chi2_1 = Z^2 for standard normal Z, so q = 2 * erfcinv(tail)^2.  The
    complementary form keeps full precision for the very small tails that
    Bonferroni correction produces.  Falls back to bisection if the closed
    form degenerates.
    """
    if not (0.0 < tail <= 1.0):
        raise ConfigError(f"tail probability must be in (0, 1], got {tail}")
    if tail == 1.0:
        return 0.0
    q = 2.0 * float(erfcinv(tail)) ** 2
    if not math.isfinite(q):
        q = _chi2_1df_isf_bisect(tail)
    return q


def critical_phi(alpha: float, m_comparisons: int, n: int) -> float:
    """Smallest phi significant at level ``alpha`` after Bonferroni correction.

    ``m_comparisons`` is the number of scored pairs and ``n`` the tweet
    universe size; the result is sqrt(q / n) for the Bonferroni-corrected
    upper chi-squared(1) quantile q.
    """
    if not (0.0 < alpha < 1.0):
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    if m_comparisons < 1:
        raise ConfigError("m_comparisons must be >= 1")
    if n < 1:
        raise ConfigError("n must be >= 1")
    q = chi2_1df_upper_quantile(alpha / m_comparisons)
    return math.sqrt(q / n)
