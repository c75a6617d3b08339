import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabgeom.graphs.components import adjacent_components, component_count, geometric_components
from stabgeom.graphs.mst import build_mst_kruskal, max_degree, mst_insert, mst_length, verify_minimax
from stabgeom.graphs.onng import build_onng, onng_length
from stabgeom.graphs.tree import WeightedTree
from stabgeom.graphs.weights import WeightFunction
from stabgeom.point_process import MarkKind, PointConfiguration, Region, add_point

CHAIN = PointConfiguration(np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]))


def _brute_mst_length(pts):
    """Minimum over all spanning trees, by enumerating (n-1)-edge subsets."""
    n = len(pts)
    edges = list(itertools.combinations(range(n), 2))
    best = math.inf
    for sub in itertools.combinations(edges, n - 1):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        ok = True
        for i, j in sub:
            a, b = find(i), find(j)
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            best = min(best, sum(np.linalg.norm(pts[i] - pts[j]) for i, j in sub))
    return best


# ------------------------------------------------------------------ weights

def test_weight_functions():
    assert WeightFunction.identity()(2.5) == 2.5
    assert WeightFunction.power(2)(3.0) == 9.0
    assert WeightFunction.indicator_le(1.5)(np.array([1.0, 1.5, 2.0])).tolist() == [1.0, 1.0, 0.0]
    t = WeightFunction.truncated(2.0, table=((0.0, 1.0), (1.0, 3.0)))
    assert t(np.array([0.5, 1.5, 2.5])).tolist() == [1.0, 3.0, 0.0]
    with pytest.raises(ValueError):
        WeightFunction.power(0.0)
    with pytest.raises(ValueError):
        WeightFunction("nope")


@pytest.mark.parametrize("w", [WeightFunction.identity(), WeightFunction.power(0.5), WeightFunction.indicator_le(2.0),
                               WeightFunction.truncated(3.0, alpha=2.0), WeightFunction.zero()])
def test_weight_dict_round_trip(w):
    assert WeightFunction.from_dict(w.to_dict()) == w


# ---------------------------------------------------------------------- MST

def test_chain_mst():
    t = build_mst_kruskal(CHAIN)
    assert sorted(t.lengths.tolist()) == [1.0, 2.0]
    assert mst_length(t) == 3.0
    assert mst_length(t, WeightFunction.indicator_le(1.5)) == 1.0
    assert mst_length(t, WeightFunction.power(2)) == 5.0
    assert max_degree(t) == 2


def test_unit_square_total_three():
    sq = PointConfiguration(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    t = build_mst_kruskal(sq)
    assert t.total_length() == pytest.approx(_brute_mst_length(sq.points)) == 3.0
    assert max_degree(t) in (2, 3)


def test_star_degree_four():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    t = build_mst_kruskal(PointConfiguration(pts))
    assert max_degree(t) == 4
    assert t.total_length() == pytest.approx(_brute_mst_length(pts))


def test_small_configurations():
    assert len(build_mst_kruskal(PointConfiguration.empty(2))) == 0
    assert len(build_mst_kruskal(PointConfiguration(np.zeros((1, 2))))) == 0


@given(st.integers(2, 7), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_kruskal_matches_brute_force(n, seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(n, 2))
    t = build_mst_kruskal(PointConfiguration(pts))
    assert t.is_spanning_tree()
    assert t.total_length() == pytest.approx(_brute_mst_length(pts), rel=1e-12)


def test_candidate_graph_matches_complete_graph():
    gen = np.random.default_rng(3)
    for d in (2, 3):
        c = PointConfiguration(gen.uniform(-3, 3, size=(700, d)))
        a = build_mst_kruskal(c)
        b = build_mst_kruskal(c, complete_below=10**6)
        assert a.edge_set() == b.edge_set()


def test_insert_example():
    tree, trace = mst_insert(build_mst_kruskal(CHAIN), [2.0, 0.0])
    assert tree.lengths.tolist() == [1.0, 1.0, 1.0]
    assert tree.total_length() == 3.0
    removed = [trace.removed_length(s) for s in range(2, trace.n_steps + 1)]
    assert 2.0 in removed
    assert trace.add_one_cost(WeightFunction.identity()) == 0.0


def test_insert_into_tiny_bases():
    t0, _ = mst_insert(build_mst_kruskal(PointConfiguration.empty(2)), [0.0, 0.0])
    assert len(t0) == 0 and t0.n_vertices == 1
    t1, _ = mst_insert(build_mst_kruskal(PointConfiguration(np.array([[1.0, 1.0]]))), [0.0, 0.0])
    assert len(t1) == 1


def test_insert_does_not_mutate_input():
    t = build_mst_kruskal(CHAIN)
    before = t.edges.copy()
    mst_insert(t, [2.0, 0.0])
    assert np.array_equal(t.edges, before)
    assert len(t.base) == 3


@pytest.mark.parametrize("order", ["chebyshev", "euclidean", "index"])
def test_insert_matches_kruskal_oracle(order):
    gen = np.random.default_rng(17)
    for _ in range(150):
        c = PointConfiguration(gen.uniform(-1, 1, size=(50, 2)))
        x = gen.uniform(-1.2, 1.2, size=2)
        tree, trace = mst_insert(build_mst_kruskal(c), x, order=order)
        ref = build_mst_kruskal(add_point(c, x))
        assert tree.edge_set() == ref.edge_set()
        cost = trace.add_one_cost(WeightFunction.identity())
        assert cost == pytest.approx(ref.total_length() - build_mst_kruskal(c).total_length(), abs=1e-12)


def test_minimax_passes_on_mst():
    gen = np.random.default_rng(2)
    for _ in range(10):
        t = build_mst_kruskal(PointConfiguration(gen.uniform(size=(8, 2))))
        assert verify_minimax(t, "exhaustive").passed


def test_minimax_detects_corrupted_tree():
    gen = np.random.default_rng(9)
    c = PointConfiguration(gen.uniform(size=(8, 2)))
    t = build_mst_kruskal(c)
    # drop the shortest tree edge and reconnect by the longest edge across the cut
    edges = [tuple(e) for e in t.edges.tolist()]
    drop = edges[int(np.argmin(t.lengths))]
    rest = [e for e in edges if e != drop]
    side = {drop[0]}
    grow = True
    while grow:
        grow = False
        for i, j in rest:
            if (i in side) != (j in side):
                side |= {i, j}
                grow = True
    across = [(i, j) for i in side for j in range(len(c)) if j not in side]
    worst = max(across, key=lambda e: np.linalg.norm(c.points[e[0]] - c.points[e[1]]))
    bad = WeightedTree.from_pairs(c, rest + [worst])
    assert bad.is_spanning_tree()
    rep = verify_minimax(bad, "exhaustive")
    assert not rep.passed
    assert rep.witness is not None


def test_minimax_two_points_vacuous():
    t = build_mst_kruskal(PointConfiguration(np.array([[0.0, 0.0], [1.0, 0.0]])))
    assert verify_minimax(t).passed


def test_planar_degree_bound():
    gen = np.random.default_rng(4)
    for _ in range(50):
        assert max_degree(build_mst_kruskal(PointConfiguration(gen.uniform(size=(200, 2))))) <= 6


# --------------------------------------------------------------------- ONNG

ONNG3 = PointConfiguration(np.array([[0.0, 0.0], [5.0, 0.0], [1.0, 0.0]]), np.array([0.1, 0.2, 0.3]), MarkKind.TIME)


def test_onng_hand_example():
    t = build_onng(ONNG3)
    assert t.edge_set() == {(0, 1), (0, 2)}
    assert sorted(t.lengths.tolist()) == [1.0, 5.0]
    assert t.parents.tolist() == [-1, 0, 0]
    assert onng_length(t) == 12.0
    assert onng_length(t, window=Region.cube((100.0, 100.0), 1.0)) == 0.0
    assert onng_length(t, WeightFunction.zero()) == 0.0


def test_onng_window_counts_incident_edges():
    t = build_onng(ONNG3)
    # only (1,0) inside: both edges touch it once
    assert onng_length(t, window=Region.cube((0.0, 0.0), 0.5)) == 6.0


def test_onng_needs_time_marks():
    with pytest.raises(ValueError):
        build_onng(CHAIN)
    assert len(build_onng(PointConfiguration(np.zeros((1, 2)), np.array([0.4]), MarkKind.TIME))) == 0


@pytest.mark.parametrize("n", [5, 47, 48, 300])
def test_onng_tree_and_brute_force(n):
    gen = np.random.default_rng(n)
    c = PointConfiguration(gen.uniform(size=(n, 2)), gen.uniform(size=n), MarkKind.TIME)
    t = build_onng(c)
    assert t.is_spanning_tree()
    order = np.argsort(c.marks)
    for k in range(1, n):
        v = order[k]
        prev = order[:k]
        d = np.linalg.norm(c.points[prev] - c.points[v], axis=1)
        assert t.parents[v] == prev[np.argmin(d)]
    assert build_onng(c, brute_force_below=10**6).edge_set() == t.edge_set()


# --------------------------------------------------------------- components

def _bfs_count(pts, r):
    n = len(pts)
    adj = np.linalg.norm(pts[:, None] - pts[None], axis=2) <= r
    seen = np.zeros(n, bool)
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        q = deque([s])
        seen[s] = True
        while q:
            u = q.popleft()
            for v in np.flatnonzero(adj[u] & ~seen):
                seen[v] = True
                q.append(v)
    return count


def test_component_examples():
    far = PointConfiguration(np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]]))
    assert component_count(far, 1.0) == 3
    assert component_count(far, 2.0) == 1
    with pytest.raises(ValueError):
        component_count(far, 0.0)


@given(st.integers(0, 2**31), st.floats(0.01, 0.6))
@settings(max_examples=60, deadline=None)
def test_components_match_bfs(seed, r):
    pts = np.random.default_rng(seed).uniform(size=(30, 2))
    lab = geometric_components(PointConfiguration(pts), r)
    assert lab.count == _bfs_count(pts, r)
    assert lab.sizes().sum() == 30
    assert lab.labels[0] == 0


def test_adjacent_components():
    c = PointConfiguration(np.array([[0.0, 0.0], [2.0, 0.0], [10.0, 0.0]]))
    assert adjacent_components(c, [1.0, 0.0], 1.0) == 2
    assert component_count(add_point(c, [1.0, 0.0]), 1.0) == component_count(c, 1.0) - 1
    assert adjacent_components(c, [5.0, 5.0], 1.0) == 0
