"""Edge-weight functions applied to Euclidean edge lengths."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["WeightFunction"]

_KINDS = ("identity", "power", "indicator_le", "truncated", "zero")


@dataclass(frozen=True)
class WeightFunction:
    """phi: [0, inf) -> [0, inf).

    ``truncated`` is ``psi(x) * 1(x <= r)`` where ``psi`` is either ``x**alpha``
    (``alpha`` given, ``alpha = 0`` meaning the constant 1) or a non-decreasing
    step table given as ``(breakpoints, values)``: ``psi(x) = values[k]`` for
    the largest ``k`` with ``breakpoints[k] <= x`` and ``0`` before the first
    breakpoint.
    """

    kind: str = "identity"
    alpha: float = 1.0
    r: float = math.inf
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power" and not self.alpha > 0:
            raise ValueError("power weight needs alpha > 0")
        if self.kind == "indicator_le" and not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError("indicator_le needs a finite r > 0")
        if self.kind == "truncated":
            if not self.r > 0:
                raise ValueError("truncation level must be positive (inf allowed)")
            if self.table is not None:
                xs, vs = (tuple(float(v) for v in part) for part in self.table)
                if len(xs) != len(vs) or not xs:
                    raise ValueError("psi table needs matching non-empty breakpoints and values")
                if any(b <= a for a, b in zip(xs, xs[1:])):
                    raise ValueError("psi breakpoints must be strictly increasing")
                if any(b < a for a, b in zip(vs, vs[1:])) or vs[0] < 0:
                    raise ValueError("psi table must be non-negative and non-decreasing")
                object.__setattr__(self, "table", (xs, vs))
            elif self.alpha < 0:
                raise ValueError("psi exponent must be >= 0")

    @classmethod
    def identity(cls) -> "WeightFunction":
        return cls("identity")

    @classmethod
    def power(cls, alpha: float) -> "WeightFunction":
        return cls("power", alpha=alpha)

    @classmethod
    def indicator_le(cls, r: float) -> "WeightFunction":
        return cls("indicator_le", r=r)

    @classmethod
    def truncated(cls, r: float = math.inf, alpha: float = 1.0, table=None) -> "WeightFunction":
        return cls("truncated", alpha=alpha, r=r, table=table)

    @classmethod
    def zero(cls) -> "WeightFunction":
        return cls("zero")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            out = x.copy()
        elif self.kind == "zero":
            out = np.zeros_like(x)
        elif self.kind == "power":
            out = x**self.alpha
        elif self.kind == "indicator_le":
            out = (x <= self.r).astype(float)
        else:
            if self.table is not None:
                xs, vs = self.table
                k = np.searchsorted(np.asarray(xs), x, side="right") - 1
                psi = np.where(k >= 0, np.asarray(vs)[np.clip(k, 0, None)], 0.0)
            elif self.alpha == 0:
                psi = np.ones_like(x)
            else:
                psi = x**self.alpha
            out = np.where(x <= self.r, psi, 0.0)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("power", "truncated"):
            d["alpha"] = self.alpha
        if self.kind in ("indicator_le", "truncated"):
            d["r"] = self.r if math.isfinite(self.r) else "inf"
        if self.table is not None:
            d["table"] = [list(self.table[0]), list(self.table[1])]
        return d

    @classmethod
    def from_dict(cls, d) -> "WeightFunction":
        if isinstance(d, str):
            return cls(d)
        r = d.get("r", math.inf)
        r = math.inf if r in ("inf", None) else float(r)
        table = d.get("table")
        return cls(d["kind"], alpha=float(d.get("alpha", 1.0)), r=r,
                   table=tuple(tuple(t) for t in table) if table else None)
