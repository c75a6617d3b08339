"""Homogeneous (marked) Poisson point processes on bounded windows.

Configurations are immutable: every operation returns a new object.  Random
draws go through :class:`SeedState`, a (root seed, stream index) pair mapped
onto a counter-based Philox generator, so replica ``k`` of a campaign sees the
same numbers whether it runs serially or in a worker process.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "MarkKind",
    "Shape",
    "Region",
    "RegionIntersection",
    "SeedState",
    "PointConfiguration",
    "sample_poisson",
    "sample_marked_poisson",
    "restrict",
    "add_point",
]


class MarkKind(str, Enum):
    NONE = "none"
    TIME = "time"
    SIGN = "sign"


class Shape(str, Enum):
    CUBE = "cube"
    BALL = "ball"


@dataclass(frozen=True)
class Region:
    """Closed axis-aligned cube (``scale`` = half-side) or Euclidean ball
    (``scale`` = radius)."""

    shape: Shape
    center: tuple
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        center = tuple(float(c) for c in self.center)
        if not center:
            raise ValueError("region center needs at least one coordinate")
        if not all(math.isfinite(c) for c in center):
            raise ValueError("region center must be finite")
        object.__setattr__(self, "center", center)
        scale = float(self.scale)
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError(f"region scale must be positive and finite, got {self.scale!r}")
        object.__setattr__(self, "scale", scale)

    @classmethod
    def cube(cls, center, half_side) -> "Region":
        return cls(Shape.CUBE, tuple(center), half_side)

    @classmethod
    def ball(cls, center, radius) -> "Region":
        return cls(Shape.BALL, tuple(center), radius)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def volume(self) -> float:
        d = self.dim
        if self.shape is Shape.CUBE:
            return (2.0 * self.scale) ** d
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * self.scale**d

    @property
    def inradius(self) -> float:
        return self.scale

    @property
    def circumradius(self) -> float:
        if self.shape is Shape.CUBE:
            return self.scale * math.sqrt(self.dim)
        return self.scale

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.center_array
        return c - self.scale, c + self.scale

    def contains(self, pts) -> np.ndarray:
        """Closed-set membership for an ``(N, d)`` array (or a single point)."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: points are {pts.shape[1]}-d, region is {self.dim}-d")
        rel = pts - self.center_array
        if self.shape is Shape.CUBE:
            inside = np.all(np.abs(rel) <= self.scale, axis=1)
        else:
            inside = np.einsum("ij,ij->i", rel, rel) <= self.scale**2
        return bool(inside[0]) if single else inside

    def shrink(self, eps: float) -> "Region":
        """The set of points at distance >= ``eps`` from the complement.

        For both shapes this is the same shape with scale reduced by ``eps``.
        """
        if eps >= self.scale:
            raise ValueError(f"cannot shrink region of scale {self.scale} by {eps}")
        return Region(self.shape, self.center, self.scale - eps)

    def translated(self, x) -> "Region":
        return Region(self.shape, tuple(np.asarray(x, dtype=float)), self.scale)

    def scaled(self, factor: float) -> "Region":
        return Region(self.shape, self.center, self.scale * factor)

    def distance_to_boundary(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the boundary of the region."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        rel = pts - self.center_array
        if self.shape is Shape.BALL:
            return np.abs(self.scale - np.linalg.norm(rel, axis=1))
        a = np.abs(rel)
        inside = np.all(a <= self.scale, axis=1)
        d_in = self.scale - a.max(axis=1)
        excess = np.clip(a - self.scale, 0.0, None)
        d_out = np.linalg.norm(excess, axis=1)
        return np.where(inside, d_in, d_out)

    def distance_to_set(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the (closed) region; 0 inside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        rel = pts - self.center_array
        if self.shape is Shape.BALL:
            return np.clip(np.linalg.norm(rel, axis=1) - self.scale, 0.0, None)
        excess = np.clip(np.abs(rel) - self.scale, 0.0, None)
        return np.linalg.norm(excess, axis=1)

    def contains_region(self, other: "Region") -> bool:
        """True when ``other`` is a subset of ``self`` (exact for cube/ball pairs)."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        off = other.center_array - self.center_array
        if self.shape is Shape.CUBE:
            # support function of other along each axis
            return bool(np.all(np.abs(off) + other.scale <= self.scale + 1e-12))
        far = np.linalg.norm(off) + other.circumradius
        return bool(far <= self.scale + 1e-12)

    def to_dict(self) -> dict:
        return {"shape": self.shape.value, "center": list(self.center), "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "Region":
        return cls(Shape(d["shape"]), tuple(d["center"]), d["scale"])


@dataclass(frozen=True)
class RegionIntersection:
    """Intersection of regions; only supports membership (enough for
    ``restrict``).  Used for local windows clipped by the sampling window."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts or len({p.dim for p in parts}) != 1:
            raise ValueError("need at least one region, all of the same dimension")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    def contains(self, pts):
        out = self.parts[0].contains(pts)
        for p in self.parts[1:]:
            out = out & p.contains(pts)
        return out


@dataclass(frozen=True)
class SeedState:
    """Address of an independent random stream.

    Identical ``(root_seed, stream_index)`` pairs always yield identical draws;
    distinct stream indices give statistically independent streams.
    """

    root_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not (0 <= int(self.root_seed) < 2**64):
            raise ValueError("root_seed must be a 64-bit unsigned integer")
        if int(self.stream_index) < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.root_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "SeedState":
        """A sub-stream derived from this one (used for nested draws)."""
        return SeedState(self.root_seed, self.stream_index * 1_000_003 + 1 + int(index))


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """Finite point set in R^d, optionally carrying one mark per point."""

    points: np.ndarray
    marks: Optional[np.ndarray] = None
    mark_kind: MarkKind = MarkKind.NONE
    dim: int = field(default=0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        dim = int(self.dim) if self.dim else (pts.shape[1] if pts.ndim == 2 else 0)
        if pts.size == 0:
            if dim <= 0:
                raise ValueError("empty configuration needs an explicit dimension")
            pts = np.zeros((0, dim))
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ValueError(f"points must be an (N, {dim}) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        kind = MarkKind(self.mark_kind)
        marks = self.marks
        if kind is MarkKind.NONE:
            if marks is not None and len(marks):
                raise ValueError("marks given for an unmarked configuration")
            marks = None
        else:
            marks = np.asarray(marks, dtype=float).reshape(-1)
            if marks.shape[0] != pts.shape[0]:
                raise ValueError("marks list length must equal points list length")
            if kind is MarkKind.TIME and np.any((marks <= 0) | (marks >= 1)):
                raise ValueError("time marks must lie strictly inside (0, 1)")
            if kind is MarkKind.SIGN and np.any(np.abs(marks) != 1):
                raise ValueError("sign marks must be +1 or -1")
            marks = marks.copy()
            marks.setflags(write=False)
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "mark_kind", kind)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def empty(cls, dim: int, mark_kind: MarkKind = MarkKind.NONE) -> "PointConfiguration":
        marks = None if MarkKind(mark_kind) is MarkKind.NONE else np.zeros(0)
        return cls(np.zeros((0, dim)), marks, mark_kind, dim)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointConfiguration):
            return NotImplemented
        if self.dim != other.dim or self.mark_kind != other.mark_kind:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if self.marks is None:
            return other.marks is None
        return np.array_equal(self.marks, other.marks)

    __hash__ = None

    def subset(self, idx) -> "PointConfiguration":
        idx = np.asarray(idx)
        marks = None if self.marks is None else self.marks[idx]
        return PointConfiguration(self.points[idx], marks, self.mark_kind, self.dim)

    def index_of(self, p) -> Optional[int]:
        hit = np.flatnonzero(np.all(self.points == np.asarray(p, dtype=float), axis=1))
        return int(hit[0]) if hit.size else None

    def duplicate_marks(self) -> list:
        """Indices of marks that are shared with an earlier point."""
        if self.marks is None:
            return []
        _, first = np.unique(self.marks, return_index=True)
        return sorted(set(range(len(self))) - set(first.tolist()))

    def to_bytes(self) -> bytes:
        buf = self.points.astype("<f8").tobytes()
        if self.marks is not None:
            buf += self.marks.astype("<f8").tobytes()
        return buf


def _check_region(region: Region, intensity: float) -> float:
    if not (intensity > 0 and math.isfinite(intensity)):
        raise ValueError(f"intensity must be positive and finite, got {intensity!r}")
    vol = region.volume()
    if not (vol > 0 and math.isfinite(vol)):
        raise ValueError("sampling window must have positive finite volume")
    return vol


def _uniform_in(region: Region, count: int, rng: np.random.Generator) -> np.ndarray:
    d = region.dim
    c = region.center_array
    if region.shape is Shape.CUBE:
        return c + region.scale * (2.0 * rng.random((count, d)) - 1.0)
    # ball: uniform direction times radius with density ~ r^(d-1)
    g = rng.standard_normal((count, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    r = region.scale * rng.random(count) ** (1.0 / d)
    return c + g / norms * r[:, None]


def sample_poisson(region: Region, intensity: float = 1.0, rng: SeedState | np.random.Generator = None) -> PointConfiguration:
    """Homogeneous Poisson process of the given intensity on ``region``."""
    vol = _check_region(region, intensity)
    gen = rng.generator() if isinstance(rng, SeedState) else rng
    if gen is None:
        raise ValueError("a SeedState or numpy Generator is required")
    count = int(gen.poisson(intensity * vol))
    return PointConfiguration(_uniform_in(region, count, gen), None, MarkKind.NONE, region.dim)


def sample_marked_poisson(region: Region, intensity: float, mark_kind, rng) -> PointConfiguration:
    """Poisson process with i.i.d. uniform(0,1) time marks or Rademacher sign marks."""
    kind = MarkKind(mark_kind)
    if kind is MarkKind.NONE:
        raise ValueError("mark_kind must be 'time' or 'sign'")
    vol = _check_region(region, intensity)
    gen = rng.generator() if isinstance(rng, SeedState) else rng
    count = int(gen.poisson(intensity * vol))
    pts = _uniform_in(region, count, gen)
    if kind is MarkKind.TIME:
        marks = gen.random(count)
        # Generator.random draws from [0, 1); zero has probability 2^-53 per draw
        marks[marks == 0.0] = np.nextafter(0.0, 1.0)
    else:
        marks = np.where(gen.random(count) < 0.5, -1.0, 1.0)
    return PointConfiguration(pts, marks, kind, region.dim)


def restrict(config: PointConfiguration, region) -> PointConfiguration:
    """Points of ``config`` lying in the closed ``region``; order and marks kept."""
    if config.dim != region.dim:
        raise ValueError(f"dimension mismatch: configuration is {config.dim}-d, region is {region.dim}-d")
    if len(config) == 0:
        return config
    return config.subset(np.flatnonzero(region.contains(config.points)))


def add_point(config: PointConfiguration, p, mark=None) -> PointConfiguration:
    """Append ``p`` (with ``mark`` for marked configurations)."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != config.dim:
        raise ValueError("dimension mismatch")
    if config.index_of(p) is not None:
        raise ValueError(f"point {p.tolist()} already in configuration")
    if config.mark_kind is MarkKind.NONE:
        if mark is not None:
            raise ValueError("mark given for an unmarked configuration")
        marks = None
    else:
        if mark is None:
            raise ValueError(f"a {config.mark_kind.value} mark is required")
        marks = np.append(config.marks, float(mark))
    return PointConfiguration(np.vstack([config.points, p[None, :]]), marks, config.mark_kind, config.dim)


def concat(configs: Iterable[PointConfiguration]) -> PointConfiguration:
    configs = list(configs)
    first = configs[0]
    pts = np.vstack([c.points for c in configs])
    marks = None if first.marks is None else np.concatenate([c.marks for c in configs])
    return PointConfiguration(pts, marks, first.mark_kind, first.dim)
