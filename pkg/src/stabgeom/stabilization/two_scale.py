"""Two-scale discrepancies |D_x F(B_n) - D_x F(A_x)| and their Monte Carlo
estimates.

A_x is the translate of b_n B_0 to x, clipped to B_n.  B_0 is the shape of the
outer window with scale ``base_scale`` (half-side for cubes, radius for
balls), so B_n = n B_0 has scale ``n * base_scale``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np

from stabgeom.parallel import map_ordered
from stabgeom.point_process import (MarkKind, PointConfiguration, Region, RegionIntersection, SeedState, Shape,
                                    sample_marked_poisson, sample_poisson)
from stabgeom.stabilization.functionals import FunctionalSpec, add_one_cost, add_one_cost_augmented

__all__ = [
    "TwoScalePair",
    "SiteDiscrepancy",
    "DiscrepancyEstimate",
    "two_scale_discrepancy",
    "two_scale_discrepancy_augmented",
    "site_grid",
    "estimate_psi",
    "estimate_phi",
    "MIN_REPLICAS",
]

MIN_REPLICAS = 30


@dataclass(frozen=True)
class TwoScalePair:
    """Outer window B_n and local scale b_n.

    ``theta`` is the margin factor of the shrunk site window
    B_n^{-theta b_n}; the default ``1.1 * base_scale`` is just above the
    smallest value keeping A_x inside B_n.  ``degenerate=True`` makes
    A_x = B_n for every x (test override for b_n = n).
    """

    outer: Region
    inner_scale: float
    base_scale: float = 1.0
    theta: Optional[float] = None
    degenerate: bool = False

    def __post_init__(self):
        if not self.inner_scale > 0:
            raise ValueError("inner scale must be positive")
        if not self.degenerate and self.inner_scale * self.base_scale >= self.outer.scale:
            raise ValueError("inner window must be smaller than the outer window")
        if self.theta is None:
            object.__setattr__(self, "theta", 1.1 * self.base_scale)

    @classmethod
    def for_scale(cls, n: float, alpha: float, d: int, shape=Shape.CUBE, base_scale: float = 1.0,
                  theta: Optional[float] = None, degenerate: bool = False) -> "TwoScalePair":
        outer = Region(shape, (0.0,) * d, n * base_scale)
        b = float(n) if degenerate else float(n) ** alpha
        return cls(outer, b, base_scale, theta, degenerate)

    @property
    def local_scale(self) -> float:
        """Half-side (or radius) of the untruncated local window."""
        return self.inner_scale * self.base_scale

    def inner_region(self, x):
        if self.degenerate:
            return self.outer
        r = Region(self.outer.shape, tuple(np.asarray(x, dtype=float)), self.local_scale)
        if self.outer.contains_region(r):
            return r
        return RegionIntersection((r, self.outer))

    def shrunk(self) -> Region:
        return self.outer.shrink(self.theta * self.inner_scale)

    def disjoint(self, x, y) -> bool:
        """Whether A_x and A_y are disjoint (exact for cubes; for balls the
        unclipped balls are compared, which is conservative)."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.degenerate:
            return False
        s = self.local_scale
        if self.outer.shape is Shape.BALL:
            return bool(np.linalg.norm(x - y) > 2 * s)
        lo = np.maximum(np.maximum(x, y) - s, np.asarray(self.outer.center) - self.outer.scale)
        hi = np.minimum(np.minimum(x, y) + s, np.asarray(self.outer.center) + self.outer.scale)
        return bool(np.any(lo > hi))


@dataclass(frozen=True)
class SiteDiscrepancy:
    site: tuple
    mean: float
    stderr: float
    count: int


@dataclass(frozen=True, eq=False)
class DiscrepancyEstimate:
    per_site: list
    values: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def sup_estimate(self) -> float:
        return max((s.mean for s in self.per_site), default=0.0)

    @property
    def sup_site(self) -> SiteDiscrepancy:
        return max(self.per_site, key=lambda s: s.mean)


def two_scale_discrepancy(F: FunctionalSpec, config: PointConfiguration, pair: TwoScalePair, x, mark=None) -> float:
    if not pair.outer.contains(np.asarray(x, dtype=float)):
        raise ValueError("site must lie in the outer window")
    big = add_one_cost(F, config, pair.outer, x, mark)
    small = add_one_cost(F, config, pair.inner_region(x), x, mark)
    return abs(big - small)


def two_scale_discrepancy_augmented(F, config, pair: TwoScalePair, x, y, mark_x=None, mark_y=None) -> float:
    big = add_one_cost_augmented(F, config, pair.outer, x, y, mark_x, mark_y)
    small = add_one_cost_augmented(F, config, pair.inner_region(x), x, y, mark_x, mark_y)
    return abs(big - small)


def site_grid(pair: TwoScalePair, per_axis: int = 3, full_window: bool = False) -> list:
    """Deterministic sites: a ``per_axis``-point lattice spanning the middle
    half of the shrunk window (or of B_n itself with ``full_window``)."""
    region = pair.outer if full_window or pair.degenerate else pair.shrunk()
    c = np.asarray(region.center)
    if per_axis == 1:
        offs = [0.0]
    else:
        offs = np.linspace(-0.5, 0.5, per_axis) * region.scale
    sites = []
    for off in itertools.product(offs, repeat=region.dim):
        p = c + np.asarray(off)
        if region.contains(p):
            sites.append(tuple(float(v) for v in p))
    return sites


def _draw_mark(kind: MarkKind, gen: np.random.Generator):
    if kind is MarkKind.TIME:
        return float(gen.uniform(np.nextafter(0.0, 1.0), 1.0))
    if kind is MarkKind.SIGN:
        return 1.0 if gen.random() < 0.5 else -1.0
    return None


def _sample(F: FunctionalSpec, region: Region, intensity: float, gen: np.random.Generator) -> PointConfiguration:
    if F.mark_kind is MarkKind.NONE:
        return sample_poisson(region, intensity, gen)
    return sample_marked_poisson(region, intensity, F.mark_kind, gen)


def _psi_replica(k, F, pair, sites, seed, intensity):
    gen = SeedState(seed.root_seed, seed.stream_index + k).generator()
    config = _sample(F, pair.outer, intensity, gen)
    out = np.empty(len(sites))
    for j, x in enumerate(sites):
        m = _draw_mark(F.mark_kind, gen)
        out[j] = 0.0 if F.is_zero() else two_scale_discrepancy(F, config, pair, x, m)
    return out


def _phi_replica(k, F, pair, site_pairs, seed, intensity):
    gen = SeedState(seed.root_seed, seed.stream_index + k).generator()
    config = _sample(F, pair.outer, intensity, gen)
    out = np.empty(len(site_pairs))
    for j, (x, y) in enumerate(site_pairs):
        mx = _draw_mark(F.mark_kind, gen)
        my = _draw_mark(F.mark_kind, gen)
        out[j] = 0.0 if F.is_zero() else two_scale_discrepancy_augmented(F, config, pair, x, y, mx, my)
    return out


def _summarise(sites, values: np.ndarray) -> DiscrepancyEstimate:
    n = values.shape[0]
    per = []
    for j, s in enumerate(sites):
        col = values[:, j]
        se = float(col.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        per.append(SiteDiscrepancy(tuple(np.asarray(s, dtype=float).ravel().tolist()), float(col.mean()), se, n))
    return DiscrepancyEstimate(per, values)


def _as_seed(rng) -> SeedState:
    if isinstance(rng, SeedState):
        return rng
    return SeedState(int(rng), 0)


def estimate_psi(F: FunctionalSpec, pair: TwoScalePair, sites: Sequence, replicas: int, rng,
                 intensity: float = 1.0, threads: int = 1) -> DiscrepancyEstimate:
    """Monte Carlo mean of the two-scale discrepancy at each site.

    Replica ``k`` samples one configuration on B_n from stream
    ``rng.stream_index + k`` and evaluates every site on it (common random
    numbers across sites and across the two scales).  The mark of the added
    point is drawn uniformly per site and replica.
    """
    if replicas < MIN_REPLICAS:
        raise ValueError(f"need at least {MIN_REPLICAS} replicas, got {replicas}")
    sites = [tuple(np.asarray(s, dtype=float).tolist()) for s in sites]
    if not sites:
        raise ValueError("no sites given")
    fn = partial(_psi_replica, F=F, pair=pair, sites=sites, seed=_as_seed(rng), intensity=intensity)
    values = np.vstack(map_ordered(fn, range(replicas), threads))
    return _summarise(sites, values)


def estimate_phi(F: FunctionalSpec, pair: TwoScalePair, site_pairs: Sequence, replicas: int, rng,
                 intensity: float = 1.0, threads: int = 1) -> DiscrepancyEstimate:
    """As :func:`estimate_psi` for the augmented cost D_x F^y; every pair must
    have disjoint local windows."""
    if replicas < MIN_REPLICAS:
        raise ValueError(f"need at least {MIN_REPLICAS} replicas, got {replicas}")
    site_pairs = [(tuple(map(float, x)), tuple(map(float, y))) for x, y in site_pairs]
    for x, y in site_pairs:
        if not pair.disjoint(x, y):
            raise ValueError(f"local windows of {x} and {y} intersect")
    fn = partial(_phi_replica, F=F, pair=pair, site_pairs=site_pairs, seed=_as_seed(rng), intensity=intensity)
    values = np.vstack(map_ordered(fn, range(replicas), threads))
    return _summarise([np.concatenate([x, y]) for x, y in site_pairs], values)
