"""Empirical Kolmogorov and Wasserstein distances to N(0, 1), moment
statistics and variance growth fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

__all__ = [
    "SampleSet",
    "VectorSampleSet",
    "MetricReport",
    "CovarianceReport",
    "empirical_dk",
    "empirical_dw",
    "standardize",
    "covariance_matrix",
    "covariance_report",
    "variance_scaling_fit",
    "bootstrap_se",
    "metric_report",
    "PSD_FLOOR",
]

PSD_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class SampleSet:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class VectorSampleSet:
    rows: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=float)
        if r.ndim == 1:
            r = r.reshape(-1, 1)
        if r.ndim != 2:
            raise ValueError("rows must form a 2-d array")
        if not np.all(np.isfinite(r)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "rows", r)

    @property
    def m(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def column(self, j: int) -> SampleSet:
        label = self.labels[j] if j < len(self.labels) else str(j)
        return SampleSet(self.rows[:, j], label)


@dataclass(frozen=True)
class MetricReport:
    d_K: float
    d_W: float
    sample_count: int
    reference: str = "standard_normal"
    d_K_se: Optional[float] = None


def _as_sample(s) -> SampleSet:
    return s if isinstance(s, SampleSet) else SampleSet(s)


def _sorted(s) -> np.ndarray:
    v = _as_sample(s).values
    if len(v) == 0:
        raise ValueError("empty sample")
    return np.sort(v)


def empirical_dk(s) -> float:
    """sup_z |F_emp(z) - Phi(z)|, exact: the sup is attained at a jump, on
    one side or the other."""
    v = _sorted(s)
    n = len(v)
    cdf = special.ndtr(v)
    # ties: F_emp jumps once per distinct value, so use the last/first index of each run
    hi = np.searchsorted(v, v, side="right") / n
    lo = np.searchsorted(v, v, side="left") / n
    return float(max(np.max(np.abs(hi - cdf)), np.max(np.abs(lo - cdf))))


def _G(x):
    # antiderivative of Phi vanishing at -inf
    return x * special.ndtr(x) + np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _H(x):
    # integral of 1 - Phi over (x, inf)
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) - x * special.ndtr(-x)


def empirical_dw(s) -> float:
    """Integral of |F_emp - Phi| over the line, piece by piece in closed form."""
    v = _sorted(s)
    n = len(v)
    total = [float(_G(v[0])), float(_H(v[-1]))]
    a, b = v[:-1], v[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    c = (np.flatnonzero(keep) + 1) / n
    q = special.ndtri(c)
    # F_emp - Phi is c - Phi, which changes sign at q
    m = np.clip(q, a, b)
    left = c * (m - a) - (_G(m) - _G(a))
    right = (_G(b) - _G(m)) - c * (b - m)
    total.extend(left.tolist())
    total.extend(right.tolist())
    return math.fsum(total)


def standardize(s) -> SampleSet:
    s = _as_sample(s)
    if len(s) < 2:
        raise ValueError("need at least 2 values to standardize")
    v = s.values
    sd = float(np.std(v, ddof=1))
    if not sd > 0:
        raise ValueError("zero variance sample cannot be standardized")
    return SampleSet((v - v.mean()) / sd, s.label)


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    clamped: tuple = field(default=())  # indices of eigenvalues below -PSD_FLOOR

    @property
    def is_psd(self) -> bool:
        return not self.clamped

    @property
    def rank(self) -> int:
        scale = max(1.0, float(np.abs(self.eigenvalues).max(initial=0.0)))
        return int(np.count_nonzero(self.eigenvalues > PSD_FLOOR * scale))


def covariance_matrix(v) -> np.ndarray:
    """Unbiased sample covariance.  Entry (i, j) and (j, i) come from the same
    accumulation, so the matrix is exactly symmetric."""
    v = v if isinstance(v, VectorSampleSet) else VectorSampleSet(v)
    n, m = v.rows.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    x = v.rows - v.rows.mean(axis=0)
    out = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            out[i, j] = out[j, i] = float(np.dot(x[:, i], x[:, j])) / (n - 1)
    return out


def covariance_report(v) -> CovarianceReport:
    """Covariance with its eigenvalues; negative eigenvalues beyond the floor
    are reported, never clamped in the returned matrix."""
    c = covariance_matrix(v)
    ev = np.linalg.eigvalsh(c)
    scale = max(1.0, float(np.abs(ev).max(initial=0.0)))
    bad = tuple(int(k) for k in np.flatnonzero(ev < -PSD_FLOOR * scale))
    return CovarianceReport(c, ev, bad)


def variance_scaling_fit(points: Sequence) -> tuple:
    """Least squares of log variance on log n: (slope, intercept, residual
    sum of squares)."""
    pts = [(float(n), float(v)) for n, v in points]
    if any(not v > 0 for _, v in pts):
        raise ValueError("variances must be positive")
    if any(not n > 0 for n, _ in pts):
        raise ValueError("scales must be positive")
    if len({n for n, _ in pts}) < 3:
        raise ValueError("need at least 3 distinct n")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sum((y - A @ coef) ** 2))
    return float(coef[0]), float(coef[1]), resid


def bootstrap_se(values, stat: Callable, n_boot: int, rng: np.random.Generator) -> float:
    """Bootstrap standard error of ``stat`` (resampling with replacement)."""
    v = np.asarray(values, dtype=float)
    if n_boot < 2:
        raise ValueError("need at least 2 bootstrap resamples")
    reps = np.array([stat(v[rng.integers(0, len(v), len(v))]) for _ in range(n_boot)])
    return float(reps.std(ddof=1))


def _dk_standardized(v) -> float:
    sd = np.std(v, ddof=1)
    if not sd > 0:
        return 1.0 if len(v) else 0.0
    return empirical_dk((v - v.mean()) / sd)


def metric_report(s, n_boot: int = 0, rng: Optional[np.random.Generator] = None) -> MetricReport:
    """d_K and d_W of the standardized sample; with ``n_boot`` > 0 also a
    bootstrap standard error for d_K (standardization redone per resample)."""
    z = standardize(s)
    se = None
    if n_boot:
        se = bootstrap_se(_as_sample(s).values, _dk_standardized, n_boot,
                          rng if rng is not None else np.random.default_rng(0))
    return MetricReport(empirical_dk(z), empirical_dw(z), len(z), "standard_normal", se)
