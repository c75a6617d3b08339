"""On-line nearest neighbour graph.

Points are visited in increasing time-mark order; each point after the first
is joined to its nearest predecessor.  Mark ties are broken by the
lexicographic order of the coordinates, then by index; distance ties go to
the predecessor that arrived first.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from stabgeom.graphs.spatial import BRUTE_FORCE_BELOW
from stabgeom.graphs.tree import WeightedTree
from stabgeom.graphs.weights import WeightFunction
from stabgeom.point_process import MarkKind, PointConfiguration, Region

__all__ = ["arrival_order", "build_onng", "onng_length"]

_KNN = 16


def arrival_order(config: PointConfiguration) -> np.ndarray:
    if config.mark_kind is not MarkKind.TIME:
        raise ValueError("ONNG needs time marks")
    pts = config.points
    keys = [np.arange(len(config))]
    keys += [pts[:, k] for k in range(config.dim - 1, -1, -1)]
    keys.append(config.marks)
    return np.lexsort(keys)


def _nearest_earlier_brute(pts: np.ndarray, rank: np.ndarray, v: int) -> int:
    earlier = np.flatnonzero(rank < rank[v])
    d = np.linalg.norm(pts[earlier] - pts[v], axis=1)
    best = d.min()
    tied = earlier[d == best]
    return int(tied[np.argmin(rank[tied])])


def build_onng(config: PointConfiguration, brute_force_below: int = BRUTE_FORCE_BELOW) -> WeightedTree:
    order = arrival_order(config)
    n = len(order)
    parents = np.full(n, -1, dtype=int)
    if n < 2:
        return WeightedTree(config, np.zeros((0, 2), dtype=int), np.zeros(0), parents)
    pts = config.points
    rank = np.empty(n, dtype=int)
    rank[order] = np.arange(n)
    parents[order[1]] = order[0]
    rest = order[2:]
    if n < brute_force_below:
        for v in rest.tolist():
            parents[v] = _nearest_earlier_brute(pts, rank, v)
    else:
        k = min(_KNN + 1, n)
        dist, idx = cKDTree(pts).query(pts[rest], k=k)
        cand_rank = rank[idx]
        ok = cand_rank < rank[rest][:, None]
        has = ok.any(axis=1)
        first = np.argmax(ok, axis=1)
        rows = np.flatnonzero(has)
        parents[rest[rows]] = idx[rows, first[rows]]
        # a tie with the found distance may hide further down the list; resolve
        # those (measure-zero) cases by brute force as well
        dbest = dist[rows, first[rows]]
        tie = np.any(ok[rows] & (dist[rows] == dbest[:, None]) & (np.arange(k) != first[rows][:, None]), axis=1)
        for v in np.concatenate([rest[~has], rest[rows[tie]]]).tolist():
            parents[v] = _nearest_earlier_brute(pts, rank, v)
    child = np.flatnonzero(parents >= 0)
    pairs = np.column_stack([child, parents[child]])
    return WeightedTree.from_pairs(config, pairs, parents)


def onng_length(tree: WeightedTree, w: WeightFunction = WeightFunction.identity(),
                window: Optional[Region] = None) -> float:
    """Sum over vertices in ``window`` of the weights of their incident edges.

    Edges with both endpoints in the window are therefore counted twice.
    ``window=None`` takes every vertex.
    """
    if len(tree) == 0:
        return 0.0
    if window is None:
        hits = np.full(len(tree), 2.0)
    else:
        inside = window.contains(tree.base.points)
        hits = inside[tree.edges[:, 0]].astype(float) + inside[tree.edges[:, 1]]
    return float(np.sum(hits * w(tree.lengths)))
