"""Geometric constants gamma_3, gamma_4, gamma_5 of the multivariate bounds."""
from __future__ import annotations

import math
from typing import Sequence

from scipy import integrate, special

from stabgeom.point_process import Shape

__all__ = ["window_volume", "overlap_pair_volume", "gamma_geometric"]


def _ball_volume(d: int, r: float = 1.0) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r ** d


def _sphere_area(d: int) -> float:
    # surface measure of the unit sphere in R^d
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def window_volume(n: float, d: int, shape=Shape.CUBE, base_scale: float = 1.0) -> float:
    """|B_n| for B_n = n B_0."""
    shape = Shape(shape)
    N = n * base_scale
    return (2 * N) ** d if shape is Shape.CUBE else _ball_volume(d, N)


def _lens(rho: float, N: float, d: int) -> float:
    """|B(0, N) ∩ B(h, N)| for |h| = rho."""
    if rho >= 2 * N:
        return 0.0
    x = 1 - (rho / (2 * N)) ** 2
    return _ball_volume(d, N) * float(special.betainc((d + 1) / 2, 0.5, x))


def overlap_pair_volume(n: float, b: float, d: int, shape=Shape.CUBE, base_scale: float = 1.0,
                        rtol: float = 1e-6) -> float:
    """Lebesgue measure of {(x, y) in B_n^2 : A_x and A_y intersect}.

    For cubes A_x and A_y meet iff |x - y|_inf <= 2 b base_scale, which
    factorises over coordinates.  For balls the measure is the integral over
    |h| < 2 b base_scale of |B_n ∩ (B_n + h)|, done by quadrature.
    """
    shape = Shape(shape)
    if b <= 0:
        return 0.0
    N, w = n * base_scale, 2 * b * base_scale
    if shape is Shape.CUBE:
        L = 2 * N
        w = min(w, L)
        return (2 * w * L - w * w) ** d
    top = min(w, 2 * N)
    val, _ = integrate.quad(lambda r: _sphere_area(d) * r ** (d - 1) * _lens(r, N, d), 0.0, top,
                            epsrel=rtol, limit=200)
    return float(val)


def gamma_geometric(n: float, b_n: float, d: int, sigmas: Sequence[float], shape=Shape.CUBE,
                    base_scale: float = 1.0) -> tuple:
    """(gamma_3, gamma_4, gamma_5) for window B_n, local scale b_n and
    component standard deviations ``sigmas``."""
    sig = [float(s) for s in sigmas]
    if not sig or any(not s > 0 for s in sig):
        raise ValueError("sigmas must be a non-empty list of positive numbers")
    inv = math.fsum(1 / s for s in sig)
    vol = window_volume(n, d, shape, base_scale)
    g3 = inv ** 2 * math.sqrt(overlap_pair_volume(n, b_n, d, shape, base_scale))
    g4 = inv ** 3 * vol
    g5 = inv ** 2 * math.sqrt(vol)
    return g3, g4, g5
