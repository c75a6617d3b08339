"""Euclidean minimal spanning trees: batch (Kruskal) and incremental
(add-and-delete) construction, plus structural checks.

Ties between equal lengths are broken by the total order on edges
``(length, i, j)`` with ``i < j`` vertex indices, so the tree is unique even on
hand-built configurations with repeated distances.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import Delaunay, QhullError

from stabgeom.graphs.tree import WeightedTree, edge_keys
from stabgeom.graphs.weights import WeightFunction
from stabgeom.point_process import PointConfiguration, add_point

__all__ = [
    "UnionFind",
    "candidate_edges",
    "build_mst_kruskal",
    "InsertionTrace",
    "mst_insert",
    "mst_length",
    "max_degree",
    "MinimaxReport",
    "verify_minimax",
]

# complete-graph candidates below this size, Delaunay edges above; crossover
# from scripts/bench_spatial.py (3-d triangulations are much more expensive)
COMPLETE_GRAPH_BELOW = {2: 96, 3: 400}


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True


def _complete_edges(n: int) -> np.ndarray:
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j])


def candidate_edges(points: np.ndarray, complete_below: Optional[int] = None) -> np.ndarray:
    """A superset of the MST edges.

    The Euclidean MST is a subgraph of the Delaunay triangulation, so above
    ``complete_below`` points only Delaunay edges are offered.  Degenerate
    inputs that Qhull rejects fall back to the complete graph.
    """
    n, d = points.shape
    if n < 2:
        return np.zeros((0, 2), dtype=int)
    if complete_below is None:
        complete_below = COMPLETE_GRAPH_BELOW.get(d, 400)
    if d == 1:
        order = np.argsort(points[:, 0], kind="stable")
        return np.sort(np.column_stack([order[:-1], order[1:]]), axis=1)
    if n < complete_below or n <= d + 1:
        return _complete_edges(n)
    try:
        simplices = Delaunay(points).simplices
    except QhullError:
        return _complete_edges(n)
    pairs = np.vstack([simplices[:, [a, b]] for a, b in itertools.combinations(range(d + 1), 2)])
    pairs = np.sort(pairs, axis=1)
    return np.unique(pairs, axis=0)


def build_mst_kruskal(config: PointConfiguration, complete_below: Optional[int] = None) -> WeightedTree:
    pts = config.points
    n = len(pts)
    cand = candidate_edges(pts, complete_below)
    if n < 2:
        return WeightedTree(config, np.zeros((0, 2), dtype=int), np.zeros(0))
    lengths = np.linalg.norm(pts[cand[:, 0]] - pts[cand[:, 1]], axis=1)
    order = edge_keys(cand, lengths)
    uf = UnionFind(n)
    chosen = []
    for k in order.tolist():
        i, j = cand[k]
        if uf.union(int(i), int(j)):
            chosen.append(k)
            if len(chosen) == n - 1:
                break
    if len(chosen) != n - 1:
        # a candidate set that misses MST edges cannot even connect the points
        raise RuntimeError("candidate graph is disconnected")
    chosen = np.asarray(chosen)
    return WeightedTree(config, cand[chosen], lengths[chosen])


@dataclass
class InsertionTrace:
    """Record of one add-and-delete run.

    ``order[k]`` is the base vertex joined to the new point at step ``k + 1``;
    ``added_lengths[k]`` is that edge's length.  ``removed[k]`` is the edge
    ``(u, v, length)`` deleted at step ``k + 2``.  Steps from ``stopped_at``
    onwards were skipped because the new edge provably is the longest in its
    cycle, i.e. it is the removed edge itself.
    """

    new_index: int
    order: np.ndarray
    added_lengths: np.ndarray
    removed: list = field(default_factory=list)
    stopped_at: Optional[int] = None

    @property
    def n_steps(self) -> int:
        return len(self.order)

    def removed_edge(self, step: int) -> tuple:
        """Edge removed when the ``step``-th new edge is attached (step >= 2)."""
        if step < 2 or step > self.n_steps:
            raise IndexError(f"step {step} outside 2..{self.n_steps}")
        k = step - 2
        if k < len(self.removed):
            return self.removed[k]
        y = int(self.order[step - 1])
        return (min(y, self.new_index), max(y, self.new_index), float(self.added_lengths[step - 1]))

    def removed_length(self, step: int) -> float:
        return self.removed_edge(step)[2]

    def add_one_cost(self, w: WeightFunction) -> float:
        """M(MST + x) - M(MST) as the alternating sum over the trace."""
        if self.n_steps == 0:
            return 0.0
        terms = [float(w(self.added_lengths[0]))]
        for k, (_, _, length) in enumerate(self.removed):
            terms.append(float(w(self.added_lengths[k + 1])))
            terms.append(-float(w(length)))
        # fsum: the result does not depend on how many cancelling steps follow
        return math.fsum(terms)


def _insertion_order(points: np.ndarray, x: np.ndarray, order: str) -> np.ndarray:
    diff = points - x
    eucl = np.linalg.norm(diff, axis=1)
    idx = np.arange(len(points))
    if order == "chebyshev":
        cheb = np.abs(diff).max(axis=1)
        return np.lexsort((idx, eucl, cheb))
    if order == "euclidean":
        return np.lexsort((idx, eucl))
    if order == "index":
        return idx
    raise ValueError(f"unknown insertion order {order!r}")


def mst_insert(tree: WeightedTree, new_point, mark=None, order: str = "chebyshev"):
    """MST of ``tree.base`` plus ``new_point`` by the add-and-delete algorithm.

    The new point gets index ``len(tree.base)``.  Returns ``(tree, trace)``.
    New edges are attached in ``order`` (sup-norm distance by default, which
    makes the visiting sequence of a sub-window centred at the new point a
    prefix of the full sequence).  The input tree is not modified.
    """
    base = tree.base
    x = np.asarray(new_point, dtype=float).reshape(-1)
    new_base = add_point(base, x, mark)
    n = len(base)
    xi = n
    pts = base.points
    if n == 0:
        return WeightedTree(new_base, np.zeros((0, 2), dtype=int), np.zeros(0)), InsertionTrace(
            xi, np.zeros(0, dtype=int), np.zeros(0))

    seq = _insertion_order(pts, x, order)
    added = np.linalg.norm(pts[seq] - x, axis=1)
    # shortest edge still to come, valid for any visiting order
    rest_min = np.minimum.accumulate(added[::-1])[::-1]

    adj = {v: {} for v in range(n + 1)}
    for (i, j), l in zip(tree.edges.tolist(), tree.lengths.tolist()):
        adj[i][j] = l
        adj[j][i] = l
    y1 = int(seq[0])
    adj[xi][y1] = adj[y1][xi] = float(added[0])

    def key(u, v, l):
        return (l, min(u, v), max(u, v))

    def current_max():
        best = None
        for u, nb in adj.items():
            for v, l in nb.items():
                if u < v:
                    k = key(u, v, l)
                    if best is None or k > best:
                        best = k
        return best

    top = current_max()
    trace = InsertionTrace(xi, seq.copy(), added.copy())
    for step in range(2, n + 1):
        y = int(seq[step - 1])
        le = float(added[step - 1])
        ke = key(xi, y, le)
        if rest_min[step - 1] > top[0]:
            # every later edge is longer than any tree edge: all remaining
            # steps delete their own new edge
            trace.stopped_at = step
            break
        if ke > top:
            trace.removed.append((min(xi, y), max(xi, y), le))
            continue
        # tree path y -> x
        prev = {y: None}
        stack = [y]
        while stack:
            u = stack.pop()
            if u == xi:
                break
            for v in adj[u]:
                if v not in prev:
                    prev[v] = u
                    stack.append(v)
        worst = ke
        worst_edge = (xi, y)
        v = xi
        while prev[v] is not None:
            u = prev[v]
            k = key(u, v, adj[u][v])
            if k > worst:
                worst, worst_edge = k, (u, v)
            v = u
        a, b = worst_edge
        trace.removed.append((min(a, b), max(a, b), worst[0]))
        if worst_edge != (xi, y):
            del adj[a][b]
            del adj[b][a]
            adj[xi][y] = adj[y][xi] = le
            if worst == top:
                top = current_max()

    pairs, lengths = [], []
    for u, nb in adj.items():
        for v, l in nb.items():
            if u < v:
                pairs.append((u, v))
                lengths.append(l)
    return WeightedTree(new_base, np.asarray(pairs, dtype=int), np.asarray(lengths)), trace


def mst_length(tree: WeightedTree, w: WeightFunction = WeightFunction.identity()) -> float:
    if len(tree) == 0:
        return 0.0
    return float(np.sum(w(tree.lengths)))


def max_degree(tree: WeightedTree) -> int:
    if tree.n_vertices == 0:
        return 0
    return int(tree.degrees().max())


@dataclass
class MinimaxReport:
    passed: bool
    mode: str
    pairs_checked: int
    witness: Optional[tuple] = None  # (x, y, tree-path bottleneck, better path)


def _bottleneck_on_tree_path(tree: WeightedTree, adj: dict, a: int, b: int) -> tuple:
    path = tree.path(a, b)
    best = None
    for u, v in zip(path, path[1:]):
        k = (adj[u][v], min(u, v), max(u, v))
        if best is None or k > best:
            best = k
    return best


def _path_below(points: np.ndarray, a: int, b: int, bound: tuple) -> Optional[list]:
    """A path a -> b in the complete graph using only edges with key < bound.

    Depth-first search over all simple paths restricted to admissible edges;
    exhaustive in the sense that it fails only if no such path exists.
    """
    n = len(points)
    dm = np.linalg.norm(points[:, None] - points[None, :], axis=2)

    def ok(u, v):
        return (dm[u, v], min(u, v), max(u, v)) < bound

    prev = {a: None}
    stack = [a]
    while stack:
        u = stack.pop()
        if u == b:
            out = [b]
            while prev[out[-1]] is not None:
                out.append(prev[out[-1]])
            return out[::-1]
        for v in range(n):
            if v not in prev and ok(u, v):
                prev[v] = u
                stack.append(v)
    return None


def verify_minimax(tree: WeightedTree, mode: str = "auto", samples: int = 1000,
                   rng: Optional[np.random.Generator] = None) -> MinimaxReport:
    """Check that every tree path minimises the maximal edge among all paths
    of the complete graph between its endpoints.

    ``exhaustive`` (default up to 12 points) decides the question for every
    pair; ``sampled`` compares each tree path against ``samples`` random
    simple paths.
    """
    n = tree.n_vertices
    if mode == "auto":
        mode = "exhaustive" if n <= 12 else "sampled"
    pts = tree.base.points
    adj = tree.adjacency()
    if n <= 2:
        return MinimaxReport(True, mode, n * (n - 1) // 2)
    if mode == "exhaustive":
        checked = 0
        for a, b in itertools.combinations(range(n), 2):
            bound = _bottleneck_on_tree_path(tree, adj, a, b)
            checked += 1
            better = _path_below(pts, a, b, bound)
            if better is not None:
                return MinimaxReport(False, mode, checked, (a, b, bound[0], better))
        return MinimaxReport(True, mode, checked)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng or np.random.default_rng(0)
    checked = 0
    for _ in range(samples):
        a, b = rng.choice(n, size=2, replace=False).tolist()
        bound = _bottleneck_on_tree_path(tree, adj, a, b)
        inner = [v for v in rng.permutation(n).tolist() if v not in (a, b)]
        k = int(rng.integers(0, len(inner) + 1))
        path = [a] + inner[:k] + [b]
        worst = max(((math.dist(pts[u], pts[v]), min(u, v), max(u, v)) for u, v in zip(path, path[1:])))
        checked += 1
        if worst < bound:
            return MinimaxReport(False, mode, checked, (a, b, bound[0], path))
    return MinimaxReport(True, mode, checked)
