"""Latent sharing space: implicit double centering and truncated SVD.

Each cell of the binarized incidence matrix is centered by its expectation
under user/tweet independence, obs - n_user * n_tweet / n_total.  The
centered matrix is a rank-one update of the sparse incidence and is never
materialized; all products with vectors go through the sparse base plus the
rank-one correction, which is what the iterative SVD consumes.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, svds

from .errors import ConfigError, ConvergenceError, DataError
from .matrix import SparseBinaryMatrix

SVD_TOL = 1e-8
SVD_MAXITER = 1000
# below this size ARPACK cannot run (k must be < min(shape)); fall back to a
# dense SVD of the operator materialized column-by-column through matvec
_DENSE_FALLBACK_DIM = 8


class CenteredOperator:
    """Implicit user-by-tweet deviation matrix obs - outer(rows, cols) / total."""

    def __init__(self, m: SparseBinaryMatrix):
        self.base = m
        self._csr = m.tocsr().astype(np.float64)
        self._csc = self._csr.tocsc()
        self.row_totals = m.row_sizes.astype(np.float64)
        self.col_totals = m.col_sizes.astype(np.float64)
        self.grand_total = float(self.row_totals.sum())
        if self.grand_total == 0:
            raise DataError("cannot center an empty matrix")

    @property
    def shape(self) -> tuple[int, int]:
        return self._csr.shape

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.shape[1]:
            raise DataError(f"expected vector of length {self.shape[1]}, got {x.shape[0]}")
        return self._csr @ x - (self.col_totals @ x / self.grand_total) * self.row_totals

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.shape[0] != self.shape[0]:
            raise DataError(f"expected vector of length {self.shape[0]}, got {y.shape[0]}")
        return self._csc.T @ y - (self.row_totals @ y / self.grand_total) * self.col_totals

    def aslinearoperator(self) -> LinearOperator:
        return LinearOperator(
            shape=self.shape,
            matvec=self.matvec,
            rmatvec=self.rmatvec,
            dtype=np.float64,
        )


def centered_matvec(op: CenteredOperator, x: np.ndarray) -> np.ndarray:
    """Product of the centered matrix with a tweet-space vector."""
    return op.matvec(x)


def centered_rmatvec(op: CenteredOperator, y: np.ndarray) -> np.ndarray:
    """Product of the transposed centered matrix with a user-space vector."""
    return op.rmatvec(y)


class LatentSpace:
    """Top-r singular triplets of the centered matrix.

    ``user_vectors`` and ``tweet_vectors`` hold orthonormal singular vectors
    as columns, sign-fixed so each left vector's largest-magnitude entry is
    positive.  ``user_scores``/``tweet_loadings`` scale them by the singular
    values when ``scaled`` is set (the principal-coordinate convention used
    before clustering); pass ``scaled=False`` for the raw vectors.
    """

    def __init__(
        self,
        singular_values: np.ndarray,
        user_vectors: np.ndarray,
        tweet_vectors: np.ndarray,
        scaled: bool = True,
    ):
        self.singular_values = np.asarray(singular_values, dtype=np.float64)
        self.user_vectors = np.asarray(user_vectors, dtype=np.float64)
        self.tweet_vectors = np.asarray(tweet_vectors, dtype=np.float64)
        self.scaled = scaled

    @property
    def r(self) -> int:
        return len(self.singular_values)

    @property
    def user_scores(self) -> np.ndarray:
        if self.scaled:
            return self.user_vectors * self.singular_values
        return self.user_vectors.copy()

    @property
    def tweet_loadings(self) -> np.ndarray:
        if self.scaled:
            return self.tweet_vectors * self.singular_values
        return self.tweet_vectors.copy()


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make each left singular vector's largest-magnitude entry positive."""
    for i in range(u.shape[1]):
        j = int(np.argmax(np.abs(u[:, i])))
        if u[j, i] < 0:
            u[:, i] = -u[:, i]
            vt[i, :] = -vt[i, :]
    return u, vt


def _dense_from_matvec(op: CenteredOperator) -> np.ndarray:
    """Materialize the operator through unit-vector products (tiny cases only)."""
    n_rows, n_cols = op.shape
    out = np.empty((n_rows, n_cols))
    e = np.zeros(n_cols)
    for j in range(n_cols):
        e[j] = 1.0
        out[:, j] = op.matvec(e)
        e[j] = 0.0
    return out


def truncated_svd(
    op: CenteredOperator,
    r: int,
    seed: int = 0,
    tol: float = SVD_TOL,
    maxiter: int = SVD_MAXITER,
    scaled: bool = True,
) -> LatentSpace:
    """Top-r singular triplets of the centered matrix via Lanczos iteration.

    Only matrix-vector products with the implicit operator are used; the
    starting vector is drawn from a seeded generator so results are
    deterministic.  Shapes too small for the Lanczos solver (including
    r = min(shape)) are handled by materializing the operator through
    matvec products and taking a dense SVD.
    """
    n_rows, n_cols = op.shape
    min_dim = min(n_rows, n_cols)
    if r < 1:
        raise ConfigError("rank must be >= 1")
    if r > min_dim:
        raise ConfigError(f"rank {r} exceeds min(n_users, n_tweets) = {min_dim}")

    if min_dim < _DENSE_FALLBACK_DIM or r > min_dim - 1:
        dense = _dense_from_matvec(op)
        u, s, vt = np.linalg.svd(dense, full_matrices=False)
        u, s, vt = u[:, :r], s[:r], vt[:r, :]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(min_dim)
        try:
            u, s, vt = svds(
                op.aslinearoperator(),
                k=r,
                which="LM",
                v0=v0,
                tol=tol,
                maxiter=maxiter,
            )
        except ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"SVD did not converge within {maxiter} iterations "
                f"({len(exc.eigenvalues)} of {r} values found)",
                residuals=getattr(exc, "eigenvalues", None),
            ) from exc
        order = np.argsort(-s, kind="stable")
        u, s, vt = u[:, order], s[order], vt[order, :]

    u, vt = _fix_signs(u.copy(), vt.copy())
    return LatentSpace(
        singular_values=s,
        user_vectors=u,
        tweet_vectors=vt.T,
        scaled=scaled,
    )


def scree(ls: LatentSpace) -> list[tuple[int, float, float]]:
    """(dimension, singular value, variance fraction) per computed dimension.

    Dimensions are reported 1-based.  Fractions are relative to the computed
    values only; a degenerate all-zero spectrum yields zero fractions.
    """
    s = ls.singular_values
    total = float((s**2).sum())
    out = []
    for i, sigma in enumerate(s, start=1):
        frac = float(sigma**2 / total) if total > 0 else 0.0
        out.append((i, float(sigma), frac))
    return out


def l2_normalize_rows(scores: np.ndarray) -> np.ndarray:
    """Scale each row to unit Euclidean norm; zero rows stay zero (with a warning)."""
    scores = np.asarray(scores, dtype=np.float64)
    norms = np.sqrt((scores**2).sum(axis=1))
    zero = norms == 0
    if zero.any():
        import warnings

        warnings.warn(
            f"{int(zero.sum())} zero rows left unnormalized", stacklevel=2
        )
    safe = np.where(zero, 1.0, norms)
    return scores / safe[:, None]
