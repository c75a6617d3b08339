"""Edge lists over indexed point sets."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from stabgeom.point_process import PointConfiguration

__all__ = ["Edge", "WeightedTree", "edge_keys"]


@dataclass(frozen=True, order=True)
class Edge:
    length: float
    i: int
    j: int

    def __post_init__(self):
        if self.i > self.j:
            a, b = self.j, self.i
            object.__setattr__(self, "i", a)
            object.__setattr__(self, "j", b)

    @property
    def endpoints(self) -> tuple:
        return (self.i, self.j)


def edge_keys(edges: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Permutation sorting edges by (length, i, j)."""
    if len(edges) == 0:
        return np.zeros(0, dtype=int)
    return np.lexsort((edges[:, 1], edges[:, 0], lengths))


@dataclass(frozen=True, eq=False)
class WeightedTree:
    """Spanning tree on ``base``; edges stored as sorted ``(i, j)`` rows, i < j.

    ``parents`` is set for ONNG trees (``parents[k]`` is the earlier-marked
    vertex ``k`` attached to, ``-1`` for the first vertex).
    """

    base: PointConfiguration
    edges: np.ndarray
    lengths: np.ndarray
    parents: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        e = np.sort(e, axis=1)
        lengths = np.asarray(self.lengths, dtype=float).reshape(-1)
        order = np.lexsort((e[:, 1], e[:, 0])) if len(e) else np.zeros(0, dtype=int)
        e, lengths = e[order], lengths[order]
        e.setflags(write=False)
        lengths.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def from_pairs(cls, base: PointConfiguration, pairs, parents=None) -> "WeightedTree":
        pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
        p = base.points
        lengths = np.linalg.norm(p[pairs[:, 0]] - p[pairs[:, 1]], axis=1) if len(pairs) else np.zeros(0)
        return cls(base, pairs, lengths, parents)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.base)

    def edge_set(self) -> frozenset:
        return frozenset(map(tuple, self.edges.tolist()))

    def edge_list(self) -> list:
        return [Edge(float(l), int(i), int(j)) for (i, j), l in zip(self.edges, self.lengths)]

    def total_length(self) -> float:
        return float(self.lengths.sum())

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def adjacency(self) -> dict:
        adj = defaultdict(dict)
        for (i, j), l in zip(self.edges.tolist(), self.lengths.tolist()):
            adj[i][j] = l
            adj[j][i] = l
        return adj

    def is_spanning_tree(self) -> bool:
        n = self.n_vertices
        if n <= 1:
            return len(self.edges) == 0
        if len(self.edges) != n - 1:
            return False
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges.tolist():
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True

    def path(self, a: int, b: int) -> list:
        """Vertex sequence of the unique tree path from ``a`` to ``b``."""
        adj = self.adjacency()
        prev = {a: None}
        stack = [a]
        while stack:
            u = stack.pop()
            if u == b:
                break
            for v in adj[u]:
                if v not in prev:
                    prev[v] = u
                    stack.append(v)
        if b not in prev:
            raise ValueError(f"vertices {a} and {b} are not connected")
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out[::-1]
