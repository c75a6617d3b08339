"""Stabilization radii: MST walls and attachment radius, ONNG cone radius,
and empirical tails of radius samples."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from stabgeom.graphs.mst import build_mst_kruskal, mst_insert
from stabgeom.point_process import MarkKind, PointConfiguration, Region, restrict

__all__ = [
    "wall_event",
    "mst_attachment_radius",
    "cone_axes",
    "cone_covering_angle",
    "CONE_HALF_ANGLE",
    "onng_stabilization_radius",
    "RadiusSample",
    "estimate_radius_tail",
    "MIN_TAIL_SAMPLES",
]

CONE_HALF_ANGLE = math.pi / 6
MIN_TAIL_SAMPLES = 100


# --------------------------------------------------------------------- walls

def _face_pieces(d: int, h: float, m: int):
    """Centres of the m^(d-1) square pieces of each face of the cube
    [-h, h]^d, with the piece half-size."""
    delta = h / m
    ticks = -h + delta * (2 * np.arange(m) + 1)
    out = []
    for axis in range(d):
        others = [k for k in range(d) if k != axis]
        for sign in (-1.0, 1.0):
            for combo in itertools.product(ticks, repeat=d - 1):
                c = np.empty(d)
                c[axis] = sign * h
                c[others] = combo
                out.append((axis, c))
    return out, delta


def _split(axis: int, c: np.ndarray, delta: float):
    d = len(c)
    others = [k for k in range(d) if k != axis]
    half = delta / 2
    for signs in itertools.product((-1.0, 1.0), repeat=d - 1):
        cc = c.copy()
        cc[others] += half * np.asarray(signs)
        yield cc


def _piece_box(axis: int, c: np.ndarray, delta: float):
    lo, hi = c - delta, c + delta
    lo[axis] = hi[axis] = c[axis]
    return lo, hi


def wall_event(config: PointConfiguration, x, u: float, window: Region, max_depth: int = 6,
               initial_pieces: int = 4) -> bool:
    """Whether x is surrounded by a wall at scale u inside ``window``.

    The sphere of the definition is the boundary of the cube of side u centred
    at x.  That boundary is cut into square pieces; a piece is certified by a
    single configuration point z in ``window`` with |z - x| <= 3/4 r and
    |z - c| + rho <= 3/4 r, where r is the distance from x to the piece, c
    its centre and rho its circumradius.  Such a z lies in the lens of every
    boundary point of the piece.  Uncertified pieces are split up to
    ``max_depth`` times.  An empty lens at a piece centre refutes the event
    outright.  The result can be a false negative, never a false positive.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    d = len(x)
    if not 0 < u < 2 * window.scale:
        raise ValueError(f"u must lie in (0, {2 * window.scale})")
    pts = restrict(config, window).points - x
    if len(pts) == 0:
        return False
    norms = np.linalg.norm(pts, axis=1)
    h = u / 2
    pieces, delta = _face_pieces(d, h, initial_pieces)
    axes = np.array([a for a, _ in pieces])
    cs = np.array([c for _, c in pieces])
    wc = np.asarray(window.center, dtype=float) - x
    for depth in range(max_depth + 1):
        rho = delta * math.sqrt(d - 1)
        lo, hi = cs - delta, cs + delta
        idx = np.arange(len(cs))
        lo[idx, axes] = hi[idx, axes] = cs[idx, axes]
        # pieces entirely outside the window impose nothing
        live = window.contains(x + np.clip(wc, lo, hi))
        rc = np.linalg.norm(cs, axis=1)
        gap = np.clip(np.abs(cs) - delta, 0.0, None)
        gap[idx, axes] = h
        r = np.linalg.norm(gap, axis=1)
        # dist[i, k] = |z_k - c_i|
        dist = np.linalg.norm(cs[:, None, :] - pts[None, :, :], axis=2)
        centre_in = window.contains(x + cs) & live
        lens = (dist <= 0.75 * rc[:, None]) & (norms[None, :] <= 0.75 * rc[:, None])
        if np.any(centre_in & ~lens.any(axis=1)):
            return False
        cert = (dist + rho <= 0.75 * r[:, None]) & (norms[None, :] <= 0.75 * r[:, None])
        failed = live & ~cert.any(axis=1)
        if not failed.any():
            return True
        if depth == max_depth:
            return False
        new_c, new_a = [], []
        for a, c in zip(axes[failed], cs[failed]):
            for cc in _split(int(a), c, delta):
                new_c.append(cc)
                new_a.append(a)
        cs, axes = np.array(new_c), np.array(new_a)
        delta /= 2
    return False


def mst_attachment_radius(config: PointConfiguration, x, window: Region) -> float:
    """Side R of the smallest cube centred at x containing every edge at x in
    MST(config restricted to window, plus x): twice the largest sup-norm
    distance from x to a neighbour."""
    x = np.asarray(x, dtype=float).reshape(-1)
    c = restrict(config, window)
    if len(c) == 0:
        return 0.0
    tree, _ = mst_insert(build_mst_kruskal(c), x)
    xi = len(c)
    e = tree.edges
    nb = np.where(e[:, 0] == xi, e[:, 1], np.where(e[:, 1] == xi, e[:, 0], -1))
    nb = nb[nb >= 0]
    return float(2.0 * np.abs(c.points[nb] - x).max())


# --------------------------------------------------------------------- cones

def _icosahedron() -> np.ndarray:
    g = (1 + math.sqrt(5)) / 2
    v = []
    for a, b in itertools.product((-1, 1), repeat=2):
        v += [(0, a, b * g), (a, b * g, 0), (b * g, 0, a)]
    return np.asarray(v, dtype=float)


def _dodecahedron() -> np.ndarray:
    g = (1 + math.sqrt(5)) / 2
    v = list(itertools.product((-1, 1), repeat=3))
    for a, b in itertools.product((-1, 1), repeat=2):
        v += [(0, a / g, b * g), (a / g, b * g, 0), (b * g, 0, a / g)]
    return np.asarray(v, dtype=float)


def cone_covering_angle(axes: np.ndarray) -> float:
    """Largest angle between a unit vector and its nearest axis (3-d).

    The farthest directions are the spherical Voronoi vertices, i.e. the
    outward normals of the facets of the convex hull of the axes.
    """
    hull = ConvexHull(axes)
    worst = 0.0
    for simplex, eq in zip(hull.simplices, hull.equations):
        nrm = eq[:3] / np.linalg.norm(eq[:3])
        worst = max(worst, float(np.arccos(np.clip(axes[simplex[0]] @ nrm, -1, 1))))
    return worst


@lru_cache(maxsize=None)
def _axes(d: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        a = np.arange(6) * math.pi / 3
        return np.column_stack([np.cos(a), np.sin(a)])
    if d == 3:
        axes = np.vstack([_icosahedron(), _dodecahedron()])
        axes /= np.linalg.norm(axes, axis=1, keepdims=True)
        if cone_covering_angle(axes) > CONE_HALF_ANGLE:
            hull = ConvexHull(axes)
            mids = {tuple(sorted(p)) for s in hull.simplices for p in itertools.combinations(s, 2)}
            extra = np.asarray([axes[i] + axes[j] for i, j in sorted(mids)])
            extra /= np.linalg.norm(extra, axis=1, keepdims=True)
            axes = np.vstack([axes, extra])
        if cone_covering_angle(axes) > CONE_HALF_ANGLE:
            raise RuntimeError("3-d cone cover check failed")
        return axes
    raise ValueError(f"no cone cover for d = {d}")


def cone_axes(d: int) -> np.ndarray:
    """Axes of cones of half-angle pi/6 covering R^d (d = 1, 2, 3)."""
    return _axes(d).copy()


def onng_stabilization_radius(config: PointConfiguration, x, t: float) -> float:
    """R(x, t) = 2 max_j (distance from x to the nearest point with mark < t in
    cone j); ``inf`` if some cone holds no such point."""
    if config.mark_kind is not MarkKind.TIME:
        raise ValueError("ONNG radius needs time marks")
    x = np.asarray(x, dtype=float).reshape(-1)
    axes = _axes(config.dim)
    pts = config.points[config.marks < t] - x
    r = np.linalg.norm(pts, axis=1)
    keep = r > 0
    pts, r = pts[keep], r[keep]
    if len(pts) == 0:
        return math.inf
    cosang = (pts @ axes.T) / r[:, None]
    in_cone = cosang >= math.cos(CONE_HALF_ANGLE) - 1e-12
    dist = np.where(in_cone, r[:, None], np.inf).min(axis=0)
    return float(2.0 * dist.max())


# ---------------------------------------------------------------------- tails

@dataclass(frozen=True, eq=False)
class RadiusSample:
    """One radius per replica.  A censored entry means only ``R > values[i]``
    is known (the search left the sampling window at that radius)."""

    values: np.ndarray
    censored: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if np.any(np.isnan(v)) or np.any(v < 0):
            raise ValueError("radii must be non-negative")
        cens = np.zeros(len(v), dtype=bool) if self.censored is None else np.asarray(self.censored, dtype=bool)
        if cens.shape != v.shape:
            raise ValueError("censoring flags must match the values")
        cens = cens | np.isinf(v)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "censored", cens)

    def __len__(self) -> int:
        return len(self.values)


def _wilson_se(k: int, n: int, z: float = 1.0) -> float:
    p = k / n
    return math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)


def estimate_radius_tail(radii: RadiusSample, thresholds: Sequence[float]) -> list:
    """``(u, P[R > u], standard error)`` for each threshold.

    Censored values count as exceeding every threshold below their censoring
    point and are dropped from the denominator above it.  The standard error
    is the half-width of the one-sigma Wilson interval.
    """
    thresholds = [float(u) for u in thresholds]
    v, cens = radii.values, radii.censored
    informative = lambda u: (~cens) | (v > u)  # noqa: E731
    if thresholds:
        u0 = min(thresholds)
        if int(np.count_nonzero(informative(u0) & ~cens)) < MIN_TAIL_SAMPLES and u0 >= 0:
            raise ValueError(f"need at least {MIN_TAIL_SAMPLES} uncensored radii")
    out = []
    for u in thresholds:
        if u < 0:
            out.append((u, 1.0, 0.0))
            continue
        keep = informative(u)
        n = int(np.count_nonzero(keep))
        k = int(np.count_nonzero(v[keep] > u))
        out.append((u, k / n, _wilson_se(k, n)))
    return out
