"""Threshold-sweep analytics over the phi-weighted neighbor graph.

Sweeping a threshold over the scored edges tracks how the network
fragments: the log ratio of surviving edges to edges inside the largest
connected component spikes where the network decomposes.  A histogram of
edge scores supports locating the valley between the organic and
coordinated modes, and candidate extraction collects every user touching a
sufficiently strong edge.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import ConfigError, DataError
from .matrix import NeighborGraph


class UnionFind:
    """Array-based disjoint sets with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return int(root)

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def connected_components(n_nodes: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Component labels (0..k-1) for every node, via union-find.

    Labels are assigned in order of each component's smallest node index.
    """
    uf = UnionFind(n_nodes)
    for a, b in zip(u, v):
        uf.union(int(a), int(b))
    out = np.empty(n_nodes, dtype=np.int64)
    first_seen: dict[int, int] = {}
    for i in range(n_nodes):
        root = uf.find(i)
        if root not in first_seen:
            first_seen[root] = len(first_seen)
        out[i] = first_seen[root]
    return out


@dataclass(frozen=True)
class SweepPoint:
    """Network fragmentation measurements at one phi threshold."""

    threshold: float
    n_edges: int
    n_lcc_edges: int
    log_ratio: float | None
    n_components: int


@dataclass(frozen=True)
class PhiHistogram:
    """Equal-width histogram of defined edge phi values over [0, 1]."""

    edges: np.ndarray  # length n_bins + 1
    counts: np.ndarray  # length n_bins

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class CandidateSet:
    """Users incident to at least one defined-phi edge at or above a threshold."""

    threshold: float
    members: frozenset[int]

    def __len__(self) -> int:
        return len(self.members)


def threshold_sweep(g: NeighborGraph, n_points: int = 100) -> list[SweepPoint]:
    """Fragmentation sweep over a uniform left-closed threshold grid.

    The grid is {0, 1/n_points, ..., (n_points-1)/n_points}.  At each
    threshold, edges with undefined phi or phi below the threshold are
    removed; components are computed by union-find over all graph nodes, so
    isolated nodes count as components.  Points are built incrementally from
    the highest threshold down, adding edges as they survive.
    """
    if n_points < 1:
        raise ConfigError("n_points must be >= 1")
    mask = g.defined_phi_mask()
    if not mask.any():
        warnings.warn("no defined-phi edges; sweep is empty", stacklevel=2)
        return []
    phis = g.phi[mask]
    us = g.u[mask]
    vs = g.v[mask]
    order = np.argsort(-phis, kind="stable")
    phis, us, vs = phis[order], us[order], vs[order]

    thresholds = [i / n_points for i in range(n_points)]
    uf = UnionFind(g.n_nodes)
    comp_edges = np.zeros(g.n_nodes, dtype=np.int64)  # edges per component root
    n_components = g.n_nodes
    added = 0
    # largest component as (n_nodes, n_edges, -root); edges are added in
    # descending-phi order so the running maximum stays current
    best: tuple[int, int, int] | None = None
    points: list[SweepPoint] = []
    for t in reversed(thresholds):
        while added < len(phis) and phis[added] >= t:
            a, b = int(us[added]), int(vs[added])
            ra, rb = uf.find(a), uf.find(b)
            if ra == rb:
                comp_edges[ra] += 1
                root = ra
            else:
                merged = comp_edges[ra] + comp_edges[rb] + 1
                uf.union(ra, rb)
                root = uf.find(ra)
                comp_edges[root] = merged
                n_components -= 1
            cand = (int(uf.size[root]), int(comp_edges[root]), -root)
            if best is None or cand > best:
                best = cand
            added += 1
        n_edges = added
        if n_edges > 0:
            n_lcc = best[1]
            log_ratio = math.log10(n_edges / n_lcc)
        else:
            n_lcc = 0
            log_ratio = None
        points.append(SweepPoint(t, n_edges, n_lcc, log_ratio, n_components))
    points.reverse()
    return points


def phi_histogram(g: NeighborGraph, n_bins: int) -> PhiHistogram:
    """Histogram of defined edge phi values in equal-width bins over [0, 1]."""
    if n_bins < 1:
        raise ConfigError("n_bins must be >= 1")
    mask = g.defined_phi_mask()
    if not mask.any():
        raise DataError("no defined-phi edges to histogram")
    counts, edges = np.histogram(g.phi[mask], bins=n_bins, range=(0.0, 1.0))
    return PhiHistogram(edges=edges, counts=counts.astype(np.int64))


def find_valley(hist: PhiHistogram, smoothing_window: int = 5) -> float | None:
    """Valley between the two most prominent modes of a smoothed histogram.

    Counts are smoothed with a centered moving average, the two local maxima
    of highest prominence are located, and the bin center of the minimum
    strictly between them is returned (middle bin on ties).  Returns None
    when fewer than two maxima survive smoothing.
    """
    if smoothing_window < 1 or smoothing_window % 2 == 0:
        raise ConfigError("smoothing_window must be a positive odd integer")
    if hist.n_bins == 0:
        raise DataError("empty histogram")
    counts = hist.counts.astype(np.float64)
    if smoothing_window > 1:
        kernel = np.ones(smoothing_window) / smoothing_window
        smoothed = np.convolve(counts, kernel, mode="same")
    else:
        smoothed = counts
    # pad below the data range so modes hugging 0 or 1 still register as peaks
    padded = np.concatenate([[-1.0], smoothed, [-1.0]])
    peaks, props = find_peaks(padded, prominence=0.0)
    peaks = peaks - 1
    if len(peaks) < 2:
        return None
    top_two = peaks[np.argsort(-props["prominences"], kind="stable")[:2]]
    p1, p2 = int(min(top_two)), int(max(top_two))
    interior = smoothed[p1 + 1 : p2]
    if interior.size == 0:
        return None
    ties = np.flatnonzero(interior == interior.min())
    idx = p1 + 1 + int(ties[(len(ties) - 1) // 2])
    return float(hist.centers()[idx])


def extract_candidates(g: NeighborGraph, threshold: float = 0.67) -> CandidateSet:
    """Users with at least one incident defined-phi edge >= ``threshold``."""
    if not (0.0 <= threshold <= 1.0):
        raise ConfigError(f"threshold must be in [0, 1], got {threshold}")
    mask = g.defined_phi_mask() & (g.phi >= threshold)
    members = frozenset(np.concatenate([g.u[mask], g.v[mask]]).tolist())
    return CandidateSet(threshold=threshold, members=members)
