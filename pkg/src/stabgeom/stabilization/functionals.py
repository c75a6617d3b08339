"""Functionals F(B) = F(eta restricted to B) and their add-one costs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from stabgeom.graphs.components import adjacent_components, component_count
from stabgeom.graphs.mst import build_mst_kruskal, mst_insert, mst_length
from stabgeom.graphs.onng import build_onng, onng_length
from stabgeom.graphs.weights import WeightFunction
from stabgeom.point_process import MarkKind, PointConfiguration, Region, add_point, restrict
from stabgeom import shot_noise as sn

__all__ = ["FunctionalSpec", "add_one_cost", "add_one_cost_augmented", "add_one_cost_batch"]

_KINDS = ("onng_length", "mst_length", "component_count", "excursion_volume", "excursion_perimeter")


@dataclass(frozen=True)
class FunctionalSpec:
    """A geometric functional of a configuration seen through a window.

    ``sub_window`` (ONNG only) is the set C of vertices whose incident edges
    are counted; ``None`` means every vertex of the restricted configuration.
    Shot-noise functionals integrate over the fixed observation grid
    ``grid``; only the sources are restricted to the window.
    """

    kind: str
    weight: WeightFunction = WeightFunction.identity()
    r: float = 1.0
    sub_window: Optional[Region] = None
    kernel: Optional[sn.KernelSpec] = None
    grid: Optional[sn.Grid] = None
    level: Optional[float] = None
    test: Optional[sn.SmoothTest] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown functional {self.kind!r}")
        if self.kind == "component_count" and not self.r > 0:
            raise ValueError("component radius must be positive")
        if self.kind.startswith("excursion"):
            if self.kernel is None or self.grid is None:
                raise ValueError("shot-noise functionals need a kernel and a grid")
            if self.kind == "excursion_volume" and (self.level is None) == (self.test is None):
                raise ValueError("excursion_volume needs exactly one of level / smooth test")
            if self.kind == "excursion_perimeter" and self.test is None:
                raise ValueError("excursion_perimeter needs a smooth test function")

    @classmethod
    def onng_length(cls, weight: WeightFunction = WeightFunction.identity(), sub_window=None):
        return cls("onng_length", weight=weight, sub_window=sub_window)

    @classmethod
    def mst_length(cls, weight: WeightFunction = WeightFunction.identity()):
        return cls("mst_length", weight=weight)

    @classmethod
    def component_count(cls, r: float):
        return cls("component_count", r=r)

    @classmethod
    def excursion_volume(cls, kernel, grid, level=None, test=None):
        return cls("excursion_volume", kernel=kernel, grid=grid, level=level, test=test)

    @classmethod
    def excursion_perimeter(cls, kernel, grid, test):
        return cls("excursion_perimeter", kernel=kernel, grid=grid, test=test)

    @property
    def mark_kind(self) -> MarkKind:
        if self.kind == "onng_length":
            return MarkKind.TIME
        if self.kind.startswith("excursion"):
            return MarkKind.SIGN
        return MarkKind.NONE

    def is_zero(self) -> bool:
        return self.kind in ("onng_length", "mst_length") and self.weight.kind == "zero"

    def evaluate(self, config: PointConfiguration, region=None) -> float:
        """F(config restricted to ``region``); ``region=None`` uses all points."""
        c = config if region is None else restrict(config, region)
        if self.kind == "component_count":
            return float(component_count(c, self.r)) if len(c) else 0.0
        if self.kind == "mst_length":
            return mst_length(build_mst_kruskal(c), self.weight)
        if self.kind == "onng_length":
            return onng_length(build_onng(c), self.weight, self.sub_window)
        fs = sn.FieldSample(c, self.kernel)
        if self.kind == "excursion_perimeter":
            return sn.smoothed_perimeter(fs, self.test, self.grid)
        if self.level is not None:
            return sn.excursion_volume(fs, self.level, self.grid)
        return sn.smoothed_volume(fs, self.test, self.grid)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("onng_length", "mst_length"):
            d["weight"] = self.weight.to_dict()
        if self.kind == "component_count":
            d["r"] = self.r
        if self.sub_window is not None:
            d["sub_window"] = self.sub_window.to_dict()
        if self.kernel is not None:
            d["kernel"] = self.kernel.to_dict()
            d["grid"] = {"window": self.grid.window.to_dict(), "spacing": self.grid.spacing}
        if self.level is not None:
            d["level"] = self.level
        if self.test is not None:
            d["test"] = self.test.to_dict()
        return d


def _onng_cost(F: FunctionalSpec, c: PointConfiguration, x: np.ndarray, mark: float) -> float:
    """Change of the ONNG length when x arrives with time mark ``mark``.

    Only vertices whose parent changes contribute; each ONNG edge is owned by
    its later endpoint.  ``math.fsum`` makes the value independent of the
    surrounding configuration's indexing, so equal local pictures give equal
    floats.
    """
    n = len(c)
    new = add_point(c, x, mark)
    po = build_onng(c).parents if n else np.zeros(0, dtype=int)
    pn = build_onng(new).parents
    pts = new.points
    if F.sub_window is None:
        inside = np.ones(n + 1, dtype=bool)
    else:
        inside = F.sub_window.contains(pts)
    w = F.weight

    def term(v, p):
        return float(w(math.dist(pts[v], pts[p]))) * (int(inside[v]) + int(inside[p]))

    terms = []
    for v in np.flatnonzero(pn[:n] != po).tolist():
        if pn[v] >= 0:
            terms.append(term(v, pn[v]))
        if po[v] >= 0:
            terms.append(-term(v, po[v]))
    if pn[n] >= 0:
        terms.append(term(n, pn[n]))
    return math.fsum(terms)


def _mark_for(F: FunctionalSpec, mark):
    kind = F.mark_kind
    if kind is MarkKind.NONE:
        if mark is not None:
            raise ValueError(f"{F.kind} takes no mark")
        return None
    if mark is None:
        raise ValueError(f"{F.kind} needs a {kind.value} mark for the added point")
    mark = float(mark)
    if kind is MarkKind.TIME and not 0 < mark < 1:
        raise ValueError("time marks must lie in (0, 1)")
    if kind is MarkKind.SIGN and abs(mark) != 1:
        raise ValueError("sign marks must be +1 or -1")
    return mark


def add_one_cost(F: FunctionalSpec, config: PointConfiguration, B, x, mark=None) -> float:
    """D_x F(B) = F((config + x) restricted to B) - F(config restricted to B).

    Exactly 0 when x lies outside B.
    """
    mark = _mark_for(F, mark)
    x = np.asarray(x, dtype=float).reshape(-1)
    if config.mark_kind is not F.mark_kind and len(config):
        raise ValueError(f"{F.kind} needs {F.mark_kind.value} marks, configuration has {config.mark_kind.value}")
    if not B.contains(x):
        return 0.0
    c = restrict(config, B)
    if len(c) == 0 and c.mark_kind is not F.mark_kind:
        c = PointConfiguration.empty(c.dim, F.mark_kind)
    if F.is_zero():
        add_point(c, x, mark)  # still reject duplicates
        return 0.0
    if F.kind == "component_count":
        if c.index_of(x) is not None:
            raise ValueError("added point duplicates a configuration point")
        return float(1 - adjacent_components(c, x, F.r))
    if F.kind == "mst_length":
        _, trace = mst_insert(build_mst_kruskal(c), x)
        return trace.add_one_cost(F.weight)
    if F.kind == "onng_length":
        return _onng_cost(F, c, x, mark)
    return F.evaluate(add_point(c, x, mark)) - F.evaluate(c)


def add_one_cost_batch(F: FunctionalSpec, config: PointConfiguration, B, x, mark=None) -> float:
    """Same quantity as :func:`add_one_cost` from two full evaluations (oracle)."""
    mark = _mark_for(F, mark)
    x = np.asarray(x, dtype=float).reshape(-1)
    if not B.contains(x):
        return 0.0
    c = restrict(config, B)
    if len(c) == 0 and c.mark_kind is not F.mark_kind:
        c = PointConfiguration.empty(c.dim, F.mark_kind)
    return F.evaluate(add_point(c, x, mark)) - F.evaluate(c)


def add_one_cost_augmented(F: FunctionalSpec, config: PointConfiguration, B, x, y,
                           mark_x=None, mark_y=None) -> float:
    """D_x F^y(B): the add-one cost at x for the configuration with y added."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if np.array_equal(x, y):
        raise ValueError("x and y must differ")
    aug = config if config.index_of(y) is not None else add_point(
        config if len(config) or config.mark_kind is F.mark_kind else PointConfiguration.empty(config.dim, F.mark_kind),
        y, _mark_for(F, mark_y))
    return add_one_cost(F, aug, B, x, mark_x)
