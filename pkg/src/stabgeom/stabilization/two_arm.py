"""Two-arm events in annuli, and the paired add-and-delete comparison they
control."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stabgeom.graphs.components import geometric_components
from stabgeom.graphs.mst import build_mst_kruskal, mst_insert
from stabgeom.point_process import PointConfiguration, Region, restrict

__all__ = [
    "crossing_components",
    "two_arm_event_boolean",
    "two_arm_event_components",
    "MismatchStep",
    "PairedTraceCheck",
    "paired_traces",
    "check_two_arm_inclusion",
]


def crossing_components(config: PointConfiguration, inner: Region, outer: Region, link: float,
                        touch: float) -> int:
    """Number of components of the ``link``-graph on the points of
    ``outer \\ inner`` that come within ``touch`` of both inner and the
    complement of outer."""
    if not outer.contains_region(inner):
        raise ValueError("inner region must lie inside the outer region")
    pts = config.points
    if len(pts) == 0:
        return 0
    keep = outer.contains(pts) & ~inner.contains(pts)
    shell = config.subset(np.flatnonzero(keep))
    if len(shell) == 0:
        return 0
    lab = geometric_components(shell, link).labels
    near_in = inner.distance_to_set(shell.points) <= touch
    near_out = outer.distance_to_boundary(shell.points) <= touch
    both = np.intersect1d(np.unique(lab[near_in]), np.unique(lab[near_out]))
    return int(both.size)


def two_arm_event_boolean(config: PointConfiguration, x, inner: Region, outer: Region, u: float,
                          touch: float | None = None) -> bool:
    """At least two components of the Boolean model with radius u/2 restricted
    to ``outer \\ inner`` reach both boundaries.

    Balls of radius u/2 overlap iff their centres are within u, so components
    are those of the u-graph on the annulus points.  A component reaches a
    boundary when one of its points lies within ``touch`` (default u) of it.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    if not inner.contains(np.asarray(x, dtype=float)):
        raise ValueError("x must lie in the inner region")
    return crossing_components(config, inner, outer, u, u if touch is None else touch) >= 2


def two_arm_event_components(config: PointConfiguration, r: float, a: float, N: float, center) -> bool:
    """Two distinct components of the r-graph on the points of the cube shell
    C_N \\ C_a (half-sides a < N, centred at ``center``) come within r of both
    C_a and the complement of C_N."""
    if not (0 < r <= a <= N):
        raise ValueError("need 0 < r <= a <= N")
    center = tuple(np.asarray(center, dtype=float))
    inner, outer = Region.cube(center, a), Region.cube(center, N)
    return crossing_components(config, inner, outer, r, r) >= 2


@dataclass(frozen=True)
class MismatchStep:
    step: int
    f_outer: float  # removed edge length at the large scale
    f_inner: float  # removed edge length at the local scale
    sup_distance: float  # sup-norm distance from x to y_step
    tested_u: tuple = ()
    fired: tuple = ()

    @property
    def testable(self) -> bool:
        return bool(self.tested_u)


@dataclass
class PairedTraceCheck:
    steps_compared: int = 0
    monotonicity_violations: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def counterexamples(self) -> int:
        return sum(1 for m in self.mismatches for f in m.fired if not f)

    @property
    def untestable(self) -> int:
        return sum(1 for m in self.mismatches if not m.testable)


def paired_traces(config: PointConfiguration, x, outer: Region, inner: Region):
    """Add-and-delete traces for inserting x into MST(config in outer) and
    MST(config in inner), both in sup-norm order around x."""
    big = restrict(config, outer)
    small = restrict(config, inner)
    _, tb = mst_insert(build_mst_kruskal(big), x)
    _, ts = mst_insert(build_mst_kruskal(small), x)
    return big, small, tb, ts


def check_two_arm_inclusion(config: PointConfiguration, x, outer: Region, local: Region, n_u: int = 3,
                            rtol: float = 1e-12) -> PairedTraceCheck:
    """Compare removed edges step by step and test the two-arm inclusion.

    ``local`` must be a cube centred at x inside ``outer``.  For each step i
    with |f_i| < |f~_i| (outer vs local scale), ``n_u`` values of u strictly
    between the two lengths and at most the annulus width are tested with
    inner = cube of half-side s_i (sup-distance of y_i) and outer = local.
    Steps where no such u exists are recorded as untestable.
    """
    x = np.asarray(x, dtype=float)
    if not outer.contains_region(local):
        raise ValueError("local window must lie inside the outer window")
    big, small, tb, ts = paired_traces(config, x, outer, local)
    out = PairedTraceCheck()
    order_small = small.points[ts.order] if ts.n_steps else np.zeros((0, len(x)))
    for i in range(2, ts.n_steps + 1):
        fb = tb.removed_length(i)
        fs = ts.removed_length(i)
        out.steps_compared += 1
        if fb > fs * (1 + rtol):
            out.monotonicity_violations += 1
        if not fb < fs:
            continue
        s_i = float(np.abs(order_small[i - 1] - x).max())
        width = local.scale - s_i
        hi = min(fs, width)
        us, fired = (), ()
        if hi > fb:
            us = tuple(fb + (hi - fb) * k / (n_u + 1) for k in range(1, n_u + 1))
            inner = Region.cube(tuple(x), s_i)
            fired = tuple(two_arm_event_boolean(small, x, inner, local, u) for u in us)
        out.mismatches.append(MismatchStep(i, fb, fs, s_i, us, fired))
    return out
