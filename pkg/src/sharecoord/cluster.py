"""Density-based clustering of latent user scores (HDBSCAN procedure).

The full procedure is implemented here rather than delegated, so each stage
stays independently checkable: core distances at ``min_samples``,
mutual-reachability distances, an exact O(n^2) minimum spanning tree, the
single-linkage hierarchy, the condensed tree at ``min_cluster_size``, and
stability-based cluster selection (excess-of-mass or leaf).  Distances are
Euclidean on the (normalized) score rows.  Everything is deterministic:
distance ties in the spanning tree are broken by ascending point index.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .network import UnionFind

SELECTION_METHODS = ("excess_of_mass", "leaf")


@dataclass(frozen=True)
class ClusterParams:
    """HDBSCAN parameters; ``min_samples`` defaults to ``min_cluster_size``."""

    min_cluster_size: int = 50
    min_samples: int | None = None
    selection: str = "excess_of_mass"

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ConfigError("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise ConfigError("min_samples must be >= 1")
        if self.selection not in SELECTION_METHODS:
            raise ConfigError(f"unknown selection method {self.selection!r}")

    @property
    def effective_min_samples(self) -> int:
        """Default when unset: min_cluster_size (capped at n-1 inside cluster())."""
        return self.min_samples if self.min_samples is not None else self.min_cluster_size


@dataclass
class ClusterAssignment:
    """Per-point cluster labels (-1 = noise) and membership strengths in [0, 1]."""

    labels: np.ndarray
    membership_strength: np.ndarray
    n_clusters: int

    def cluster_sizes(self) -> dict[int, int]:
        out = {}
        for lab in range(-1, self.n_clusters):
            out[lab] = int((self.labels == lab).sum())
        return out


def _distance_row(points: np.ndarray, i: int) -> np.ndarray:
    """Euclidean distances from point i to every point, fixed evaluation order."""
    diff = points - points[i]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def core_distances(points: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance from each point to its min_samples-th nearest other point."""
    n = len(points)
    if not (1 <= min_samples <= n - 1):
        raise ConfigError(f"min_samples must be in [1, {n - 1}], got {min_samples}")
    cores = np.empty(n)
    for i in range(n):
        row = _distance_row(points, i)
        # row[i] == 0 occupies one slot, so index min_samples is the
        # min_samples-th other point
        cores[i] = np.partition(row, min_samples)[min_samples]
    return cores


def mutual_reachability(d_ab: float, core_a: float, core_b: float) -> float:
    """max(core_a, core_b, d_ab): never below the plain distance."""
    return max(d_ab, core_a, core_b)


def mutual_reachability_matrix(points: np.ndarray, min_samples: int) -> np.ndarray:
    """Dense mutual-reachability matrix; intended for small instances and tests."""
    cores = core_distances(points, min_samples)
    n = len(points)
    out = np.empty((n, n))
    for i in range(n):
        out[i] = np.maximum(_distance_row(points, i), cores)
    np.maximum(out, cores[:, None], out=out)
    np.fill_diagonal(out, 0.0)
    return out


def minimum_spanning_tree(points: np.ndarray, cores: np.ndarray) -> np.ndarray:
    """Exact MST of the complete mutual-reachability graph (Prim, O(n^2)).

    Returns an (n-1, 3) array of rows (u, v, weight) with u < v, sorted by
    (weight, u, v).  Rows are computed on the fly so no n x n matrix is held.
    """
    n = len(points)
    in_tree = np.zeros(n, dtype=bool)
    best_w = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=np.int64)
    edges = np.empty((n - 1, 3))
    current = 0
    in_tree[0] = True
    for step in range(n - 1):
        row = np.maximum(_distance_row(points, current), cores)
        row = np.maximum(row, cores[current])
        # strict improvement keeps the earliest attachment point on ties
        improve = (row < best_w) & ~in_tree
        best_w[improve] = row[improve]
        best_from[improve] = current
        nxt = int(np.argmin(best_w))  # ties resolved by lowest index
        a, b = int(best_from[nxt]), nxt
        edges[step] = (min(a, b), max(a, b), best_w[nxt])
        in_tree[nxt] = True
        best_w[nxt] = np.inf
        current = nxt
    order = np.lexsort((edges[:, 1], edges[:, 0], edges[:, 2]))
    return edges[order]


def single_linkage_tree(mst_edges: np.ndarray, n: int) -> np.ndarray:
    """Merge table from sorted MST edges: rows (child_a, child_b, dist, size).

    Dendrogram node ids follow the usual convention: points are 0..n-1 and
    the i-th merge creates node n+i.
    """
    uf = UnionFind(n)
    node_of = np.arange(n, dtype=np.int64)  # uf root -> dendrogram node id
    merges = np.empty((n - 1, 4))
    for i in range(n - 1):
        u, v, w = int(mst_edges[i, 0]), int(mst_edges[i, 1]), mst_edges[i, 2]
        ru, rv = uf.find(u), uf.find(v)
        na, nb = int(node_of[ru]), int(node_of[rv])
        size = int(uf.size[ru] + uf.size[rv])
        uf.union(ru, rv)
        node_of[uf.find(ru)] = n + i
        merges[i] = (min(na, nb), max(na, nb), w, size)
    return merges


def condense_tree(merges: np.ndarray, n: int, min_cluster_size: int) -> list[tuple]:
    """Condensed cluster tree: rows (parent, child, lambda, size).

    Children smaller than ``min_cluster_size`` fall out of their parent
    cluster as points at lambda = 1/distance of the split; a split into two
    sufficiently large children creates two new clusters.  Cluster ids start
    at ``n`` (the root); point children keep their point ids.
    """
    root = 2 * n - 2
    relabel = np.full(2 * n - 1, -1, dtype=np.int64)
    relabel[root] = n
    next_label = n + 1
    ignore = np.zeros(2 * n - 1, dtype=bool)
    rows: list[tuple] = []

    def node_size(nd: int) -> int:
        return 1 if nd < n else int(merges[nd - n, 3])

    def subtree_points(nd: int) -> list[int]:
        out = []
        stack = [nd]
        while stack:
            x = stack.pop()
            ignore[x] = True
            if x < n:
                out.append(x)
            else:
                stack.append(int(merges[x - n, 0]))
                stack.append(int(merges[x - n, 1]))
        return out

    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node < n or ignore[node]:
            continue
        left = int(merges[node - n, 0])
        right = int(merges[node - n, 1])
        dist = merges[node - n, 2]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        big_left = node_size(left) >= min_cluster_size
        big_right = node_size(right) >= min_cluster_size
        if big_left and big_right:
            for child in (left, right):
                relabel[child] = next_label
                rows.append((int(relabel[node]), int(next_label), lam, node_size(child)))
                next_label += 1
                queue.append(child)
        elif not big_left and not big_right:
            for child in (left, right):
                for p in subtree_points(child):
                    rows.append((int(relabel[node]), p, lam, 1))
        else:
            keep, drop = (left, right) if big_left else (right, left)
            relabel[keep] = relabel[node]
            for p in subtree_points(drop):
                rows.append((int(relabel[node]), p, lam, 1))
            queue.append(keep)
    return rows


def compute_stability(rows: list[tuple], n: int) -> dict[int, float]:
    """Cluster stability: sum over children of (lambda - birth_lambda) * size."""
    births: dict[int, float] = {n: 0.0}
    for parent, child, lam, _ in rows:
        if child >= n:
            births[child] = lam
    stability: dict[int, float] = {c: 0.0 for c in births}
    for parent, child, lam, size in rows:
        stability[parent] += (lam - births[parent]) * size
    return stability


def _cluster_children(rows: list[tuple], n: int) -> dict[int, list[int]]:
    children: dict[int, list[int]] = {}
    for parent, child, _, _ in rows:
        if child >= n:
            children.setdefault(parent, []).append(child)
    return children


def select_clusters(
    rows: list[tuple], stability: dict[int, float], n: int, method: str
) -> set[int]:
    """Stability-based cluster selection; the root is never selected."""
    children = _cluster_children(rows, n)
    cluster_ids = sorted(stability)
    root = n
    if method == "leaf":
        leaves = {c for c in cluster_ids if not children.get(c)}
        leaves.discard(root)
        return leaves
    # excess of mass, bottom-up
    stab = dict(stability)
    is_cluster = {c: True for c in cluster_ids}
    for node in sorted(cluster_ids, reverse=True):
        if node == root:
            continue
        subtree = sum(stab[ch] for ch in children.get(node, []))
        if subtree > stab[node]:
            is_cluster[node] = False
            stab[node] = subtree
        else:
            stack = list(children.get(node, []))
            while stack:
                ch = stack.pop()
                is_cluster[ch] = False
                stack.extend(children.get(ch, []))
    return {c for c in cluster_ids if c != root and is_cluster[c]}


def cluster(
    points: np.ndarray, params: ClusterParams | None = None, seed: int = 0
) -> ClusterAssignment:
    """HDBSCAN partition of score rows into clusters plus noise.

    ``seed`` is accepted for interface stability but unused: the procedure
    is fully deterministic (no subsampling is performed).  Labels are
    assigned in order of each cluster's smallest member index, so reruns
    produce identical partitions and identical numbering.
    """
    params = params or ClusterParams()
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise DataError("points must be a 2-D array")
    if not np.isfinite(points).all():
        raise DataError("points must be finite")
    n = len(points)
    # n == min_cluster_size is legal and yields all noise (the root is never
    # selectable); below that the size bound is unsatisfiable outright
    if n < max(2, params.min_cluster_size):
        raise ConfigError(
            f"need at least {max(2, params.min_cluster_size)} points for "
            f"min_cluster_size={params.min_cluster_size}, got {n}"
        )
    if params.min_samples is not None:
        min_samples = params.min_samples
        if min_samples > n - 1:
            raise ConfigError(f"min_samples={min_samples} needs more than {n} points")
    else:
        min_samples = min(params.min_cluster_size, n - 1)

    cores = core_distances(points, min_samples)
    mst = minimum_spanning_tree(points, cores)
    merges = single_linkage_tree(mst, n)
    rows = condense_tree(merges, n, params.min_cluster_size)
    stability = compute_stability(rows, n)
    selected = select_clusters(rows, stability, n, params.selection)

    parent_of_point = np.empty(n, dtype=np.int64)
    lambda_of_point = np.empty(n)
    cluster_parent: dict[int, int] = {}
    for parent, child, lam, _ in rows:
        if child < n:
            parent_of_point[child] = parent
            lambda_of_point[child] = lam
        else:
            cluster_parent[child] = parent

    root = n
    raw_label = np.full(n, -1, dtype=np.int64)
    for p in range(n):
        c = int(parent_of_point[p])
        while c not in selected and c != root:
            c = cluster_parent[c]
        if c in selected:
            raw_label[p] = c

    # stable numbering: clusters ordered by their smallest member index
    first_member: dict[int, int] = {}
    for p in range(n):
        c = raw_label[p]
        if c != -1 and c not in first_member:
            first_member[c] = p
    ordered = sorted(first_member, key=lambda c: first_member[c])
    label_map = {c: i for i, c in enumerate(ordered)}

    labels = np.array([label_map.get(int(c), -1) for c in raw_label], dtype=np.int64)
    strengths = np.zeros(n)
    for lab in range(len(ordered)):
        members = labels == lab
        lam_members = lambda_of_point[members]
        lam_max = lam_members.max()
        if not np.isfinite(lam_max) or lam_max == 0.0:
            strengths[members] = 1.0
        else:
            strengths[members] = np.minimum(lam_members / lam_max, 1.0)
    return ClusterAssignment(
        labels=labels, membership_strength=strengths, n_clusters=len(ordered)
    )
