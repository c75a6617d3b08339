"""Static spatial index with k-NN and fixed-radius queries.

Backed by ``scipy.spatial.cKDTree``; tiny point sets use direct distance
matrices instead (see ``BRUTE_FORCE_BELOW``).
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

__all__ = ["SpatialIndex", "BRUTE_FORCE_BELOW"]

# measured with scripts/bench_spatial.py: kd-tree build+query overtakes the
# distance matrix at about 48 points for d in {2, 3}
BRUTE_FORCE_BELOW = 48


class SpatialIndex:
    def __init__(self, points: np.ndarray, brute_force_below: int = BRUTE_FORCE_BELOW):
        self.points = np.asarray(points, dtype=float)
        self.n = self.points.shape[0]
        self._tree = None if self.n < brute_force_below else cKDTree(self.points)

    @property
    def brute(self) -> bool:
        return self._tree is None

    def knn(self, queries: np.ndarray, k: int):
        """Distances and indices of the ``k`` nearest points, ascending.

        Missing neighbours (``k > n``) are reported with distance ``inf`` and
        index ``n``, matching cKDTree.
        """
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        k = int(k)
        if self._tree is not None:
            dist, idx = self._tree.query(q, k=k)
            if k == 1:
                dist, idx = dist[:, None], idx[:, None]
            return dist, idx
        if self.n == 0:
            return np.full((len(q), k), np.inf), np.full((len(q), k), 0, dtype=int)
        dm = np.linalg.norm(q[:, None, :] - self.points[None, :, :], axis=2)
        order = np.argsort(dm, axis=1, kind="stable")[:, :k]
        dist = np.take_along_axis(dm, order, axis=1)
        if k > self.n:
            pad = k - self.n
            dist = np.hstack([dist, np.full((len(q), pad), np.inf)])
            order = np.hstack([order, np.full((len(q), pad), self.n)])
        return dist, order

    def radius(self, query, r: float) -> np.ndarray:
        """Sorted indices of points within closed distance ``r`` of ``query``."""
        query = np.asarray(query, dtype=float)
        if self.n == 0:
            return np.zeros(0, dtype=int)
        if self._tree is not None:
            return np.array(sorted(self._tree.query_ball_point(query, r)), dtype=int)
        d = np.linalg.norm(self.points - query, axis=1)
        return np.flatnonzero(d <= r)

    def pairs(self, r: float) -> np.ndarray:
        """All index pairs ``(i, j)``, ``i < j``, at distance ``<= r``."""
        if self.n < 2:
            return np.zeros((0, 2), dtype=int)
        if self._tree is not None:
            out = self._tree.query_pairs(r, output_type="ndarray")
            return out.astype(int) if len(out) else np.zeros((0, 2), dtype=int)
        i, j = np.triu_indices(self.n, k=1)
        d = np.linalg.norm(self.points[i] - self.points[j], axis=1)
        keep = d <= r
        return np.column_stack([i[keep], j[keep]])
