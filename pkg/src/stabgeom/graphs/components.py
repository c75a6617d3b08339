"""Connected components of fixed-radius geometric graphs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from stabgeom.graphs.spatial import SpatialIndex
from stabgeom.point_process import PointConfiguration

__all__ = ["ComponentLabeling", "geometric_components", "component_count", "adjacent_components"]


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """``labels[i]`` is the component of point ``i``; components are numbered
    by their smallest member."""

    labels: np.ndarray
    count: int

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.count)


def _canonical(labels: np.ndarray) -> np.ndarray:
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    # relabel so component ids increase with their first member
    rank = np.argsort(np.argsort(first))
    return rank[inv]


def geometric_components(config: PointConfiguration, r: float) -> ComponentLabeling:
    """Components of the graph joining points at distance ``<= r``."""
    if not r > 0:
        raise ValueError("r must be positive")
    n = len(config)
    if n == 0:
        return ComponentLabeling(np.zeros(0, dtype=int), 0)
    pairs = SpatialIndex(config.points).pairs(r)
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    count, labels = connected_components(adj, directed=False)
    return ComponentLabeling(_canonical(labels), int(count))


def component_count(config: PointConfiguration, r: float) -> int:
    return geometric_components(config, r).count


def adjacent_components(config: PointConfiguration, x, r: float) -> int:
    """Number of distinct components of the r-graph on ``config`` that have a
    point within distance ``r`` of ``x``."""
    if len(config) == 0:
        return 0
    lab = geometric_components(config, r)
    near = np.linalg.norm(config.points - np.asarray(x, dtype=float), axis=1) <= r
    return int(np.unique(lab.labels[near]).size)
