import math

import numpy as np
import pytest

from sharecoord.errors import ConfigError, DataError
from sharecoord.matrix import NeighborGraph
from sharecoord.network import (
    PhiHistogram,
    UnionFind,
    connected_components,
    extract_candidates,
    find_valley,
    phi_histogram,
    threshold_sweep,
)

from conftest import bfs_components


def make_graph(n_nodes, edges):
    """edges: list of (u, v, phi); cosine set equal to phi for convenience."""
    u = np.array([e[0] for e in edges], dtype=np.int64)
    v = np.array([e[1] for e in edges], dtype=np.int64)
    p = np.array([e[2] for e in edges], dtype=np.float64)
    return NeighborGraph(n_nodes=n_nodes, k=3, u=u, v=v, cosine=p.copy(), phi=p)


def random_graph(rng, n_nodes=30, n_edges=60, undefined_frac=0.0):
    pairs = set()
    while len(pairs) < n_edges:
        a, b = rng.integers(0, n_nodes, size=2)
        if a != b:
            pairs.add((min(int(a), int(b)), max(int(a), int(b))))
    edges = []
    for a, b in sorted(pairs):
        p = float(rng.random())
        if rng.random() < undefined_frac:
            p = float("nan")
        edges.append((a, b, p))
    return make_graph(n_nodes, edges)


class TestThresholdSweep:
    def test_connected_graph_at_zero(self):
        g = make_graph(3, [(0, 1, 0.5), (1, 2, 0.8)])
        points = threshold_sweep(g, n_points=1)
        assert points[0].threshold == 0.0
        assert points[0].log_ratio == 0.0
        assert points[0].n_components == 1

    def test_two_equal_components(self):
        edges = [(i, i + 1, 0.9) for i in range(4)]  # 4-edge path on 0..4
        edges += [(5 + i, 5 + i + 1, 0.9) for i in range(4)]
        edges += [(0, 2, 0.9), (5, 7, 0.9)]  # 5 edges per component
        g = make_graph(10, edges)
        point = threshold_sweep(g, n_points=1)[0]
        assert point.n_edges == 10
        assert point.n_lcc_edges == 5
        assert point.log_ratio == pytest.approx(math.log10(2), abs=1e-12)

    def test_three_edge_path(self):
        g = make_graph(4, [(0, 1, 0.2), (1, 2, 0.5), (2, 3, 0.9)])
        points = threshold_sweep(g, n_points=100)
        at_60 = points[60]
        assert at_60.threshold == pytest.approx(0.60)
        assert at_60.n_edges == 1
        assert at_60.n_lcc_edges == 1
        assert at_60.log_ratio == 0.0
        # isolated nodes count as components: nodes {0,1} isolated, {2,3} joined
        assert at_60.n_components == 3

    def test_grid_is_left_closed(self):
        g = make_graph(2, [(0, 1, 0.5)])
        points = threshold_sweep(g, n_points=100)
        assert [p.threshold for p in points[:3]] == [0.0, 0.01, 0.02]
        assert points[-1].threshold == pytest.approx(0.99)
        assert len(points) == 100

    def test_no_defined_edges_warns_empty(self):
        g = make_graph(3, [(0, 1, float("nan"))])
        with pytest.warns(UserWarning):
            assert threshold_sweep(g) == []

    def test_all_edges_below_one_point(self):
        g = make_graph(3, [(0, 1, 0.3)])
        points = threshold_sweep(g, n_points=100)
        # beyond 0.3 no edges survive: emitted with log_ratio undefined
        later = points[40]
        assert later.n_edges == 0
        assert later.log_ratio is None
        assert later.n_components == 3

    def test_undefined_phi_excluded(self):
        g = make_graph(4, [(0, 1, float("nan")), (2, 3, 0.5)])
        point = threshold_sweep(g, n_points=1)[0]
        assert point.n_edges == 1

    @pytest.mark.parametrize("seed", range(6))
    def test_monotonicity_and_nesting(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n_nodes=40, n_edges=80, undefined_frac=0.1)
        points = threshold_sweep(g, n_points=100)
        for prev, cur in zip(points, points[1:]):
            assert cur.n_edges <= prev.n_edges
            assert cur.n_components >= prev.n_components
            assert cur.n_lcc_edges <= cur.n_edges
        thresholds = [0.1, 0.35, 0.7, 0.95]
        sets = [extract_candidates(g, t).members for t in thresholds]
        for small, large in zip(sets[1:], sets):
            assert small <= large

    @pytest.mark.parametrize("seed", range(4))
    def test_lcc_edges_match_naive_recount(self, seed):
        rng = np.random.default_rng(900 + seed)
        g = random_graph(rng, n_nodes=50, n_edges=120, undefined_frac=0.1)
        points = threshold_sweep(g, n_points=100)
        for p in points[::7]:
            mask = ~np.isnan(g.phi) & (g.phi >= p.threshold)
            us, vs = g.u[mask], g.v[mask]
            assert p.n_edges == int(mask.sum())
            if p.n_edges == 0:
                assert p.n_lcc_edges == 0 and p.log_ratio is None
                continue
            comps = bfs_components(50, zip(us, vs))
            best_nodes = max(len(c) for c in comps)
            candidates = [c for c in comps if len(c) == best_nodes]
            n_lcc = max(
                sum(1 for a, b in zip(us, vs) if a in c and b in c) for c in candidates
            )
            assert p.n_lcc_edges == n_lcc
            assert p.n_components == len(comps)

    def test_components_match_bfs_oracle(self, rng):
        g = random_graph(rng, n_nodes=200, n_edges=300)
        for t in (0.0, 0.3, 0.6, 0.9):
            mask = g.phi >= t
            labels = connected_components(200, g.u[mask], g.v[mask])
            oracle = bfs_components(200, zip(g.u[mask], g.v[mask]))
            assert len(set(labels.tolist())) == len(oracle)
            for comp in oracle:
                assert len({int(labels[x]) for x in comp}) == 1


class TestUnionFind:
    def test_basic_merge(self):
        uf = UnionFind(4)
        assert uf.union(0, 1)
        assert not uf.union(1, 0)
        assert uf.find(0) == uf.find(1)
        assert uf.find(2) != uf.find(0)

    def test_matches_bfs_on_random_graphs(self, rng):
        n = 500
        pairs = [(int(a), int(b)) for a, b in rng.integers(0, n, size=(800, 2)) if a != b]
        labels = connected_components(n, [p[0] for p in pairs], [p[1] for p in pairs])
        oracle = bfs_components(n, pairs)
        assert len(set(labels.tolist())) == len(oracle)


class TestPhiHistogram:
    def test_all_mass_last_bin(self):
        g = make_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
        hist = phi_histogram(g, 10)
        assert hist.counts.tolist() == [0] * 9 + [2]

    def test_two_bins_split(self):
        g = make_graph(4, [(0, 1, 0.05), (2, 3, 0.95)])
        hist = phi_histogram(g, 2)
        assert hist.counts.tolist() == [1, 1]

    def test_mass_conservation(self, rng):
        g = random_graph(rng, n_nodes=30, n_edges=70, undefined_frac=0.2)
        hist = phi_histogram(g, 17)
        assert hist.counts.sum() == int((~np.isnan(g.phi)).sum())

    def test_requires_defined_edges(self):
        g = make_graph(2, [(0, 1, float("nan"))])
        with pytest.raises(DataError):
            phi_histogram(g, 5)


class TestFindValley:
    def test_unimodal_returns_none(self):
        counts = np.array([1, 3, 9, 14, 9, 3, 1, 0, 0, 0], dtype=np.int64)
        hist = PhiHistogram(edges=np.linspace(0, 1, 11), counts=counts)
        assert find_valley(hist) is None

    def test_symmetric_two_spikes(self):
        # spikes at bins 3 and 17 of 20: the zero run between the smoothed
        # bumps is bins 6..14, whose middle is bin 10, center 0.525 -- the
        # midpoint of the two spike centers (0.175 and 0.875)
        counts = np.zeros(20, dtype=np.int64)
        counts[3] = 100
        counts[17] = 100
        hist = PhiHistogram(edges=np.linspace(0, 1, 21), counts=counts)
        got = find_valley(hist, smoothing_window=5)
        assert got == pytest.approx((0.175 + 0.875) / 2, abs=1e-12)

    def test_beta_mixture_valley_located(self):
        rng = np.random.default_rng(7)
        sample = np.concatenate(
            [rng.beta(2, 8, size=3000), rng.beta(12, 2, size=2000)]
        )
        counts, edges = np.histogram(sample, bins=20, range=(0, 1))
        hist = PhiHistogram(edges=edges, counts=counts)
        got = find_valley(hist)
        assert got is not None and 0.4 < got < 0.8
        # oracle: exhaustive scan of the smoothed histogram between the two
        # modes, located independently as the maxima of each half
        smoothed = np.convolve(counts.astype(float), np.ones(5) / 5, mode="same")
        lo_mode = int(smoothed[:10].argmax())
        hi_mode = 10 + int(smoothed[10:].argmax())
        valley_bin = int(np.clip(np.searchsorted(edges, got) - 1, 0, 19))
        assert lo_mode < valley_bin < hi_mode
        assert smoothed[valley_bin] <= smoothed[lo_mode + 1 : hi_mode].min() + 1e-12

    def test_window_validation(self):
        hist = PhiHistogram(edges=np.linspace(0, 1, 4), counts=np.array([1, 2, 1]))
        with pytest.raises(ConfigError):
            find_valley(hist, smoothing_window=4)


class TestExtractCandidates:
    def test_single_edge_above(self):
        g = make_graph(4, [(1, 3, 0.7)])
        cands = extract_candidates(g, 0.67)
        assert cands.members == frozenset({1, 3})

    def test_all_below(self):
        g = make_graph(4, [(0, 1, 0.5), (2, 3, 0.66)])
        assert extract_candidates(g, 0.67).members == frozenset()

    def test_undefined_never_counts(self):
        g = make_graph(2, [(0, 1, float("nan"))])
        assert extract_candidates(g, 0.0).members == frozenset()

    def test_threshold_validation(self):
        g = make_graph(2, [(0, 1, 0.5)])
        with pytest.raises(ConfigError):
            extract_candidates(g, 1.5)
