"""Acceptance campaign: one test per criterion, each recording a PASS/FAIL
line (printed in the pytest terminal summary, or on stdout when run as a
script).  Tolerances are fixed; nothing here is tuned to the outcome.

Runs for about 15 minutes on one core.
"""
import math
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy.special import ndtri

from stabgeom import shot_noise as sn
from stabgeom.harness import report_csv, report_json, run_experiment, spec_from_dict
from stabgeom.harness.verify import check_component_bound, check_degree, check_insert_oracle, check_minimax, \
    check_wall_radius
from stabgeom.point_process import MarkKind, PointConfiguration, Region, SeedState, sample_marked_poisson, \
    sample_poisson
from stabgeom.stabilization import (FunctionalSpec, RadiusSample, TwoScalePair, estimate_radius_tail,
                                    onng_stabilization_radius, two_scale_discrepancy, wall_event)
from stabgeom.stats import covariance_matrix, empirical_dk, empirical_dw, variance_scaling_fit

pytestmark = pytest.mark.acceptance

SEED = 20261017
GRID = [8, 12, 16, 24, 32]
RESULTS = {}


def record(num: int, ok: bool, detail: str) -> None:
    RESULTS[num] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
    assert ok, detail


def line_fit(x, y):
    """Least-squares slope and R^2."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    r2 = 1 - resid @ resid / np.sum((y - y.mean()) ** 2)
    return float(slope), float(r2)


# every harness campaign of the suite; criterion 14 reruns all of them
CAMPAIGNS = {
    "mst": {"experiment": "mst_clt", "n": GRID, "replicas": 1000, "bootstrap": 200},
    "onng": {"experiment": "onng_clt", "n": GRID, "replicas": 1000},
    "components": {"experiment": "components_clt", "n": GRID, "replicas": 1000, "r": 0.8},
    "psi": {"experiment": "psi_decay", "n": GRID, "replicas": 200, "functional": "component_count", "r": 0.8,
            "alpha": 0.5},
    "psi_degenerate": {"experiment": "psi_decay", "n": GRID, "replicas": 30, "functional": "component_count",
                       "r": 0.8, "degenerate": True},
    "two_arm": {"experiment": "two_arm_frequency", "n": [24], "replicas": 500, "alpha": 0.6},
}


def _spec(name):
    return spec_from_dict(dict(CAMPAIGNS[name], seed=SEED))


@lru_cache(maxsize=None)
def campaign(name, threads=1):
    t0 = time.perf_counter()
    rep = run_experiment(_spec(name), threads=threads)
    return rep, time.perf_counter() - t0


# ------------------------------------------------------------------ 1 to 4

def test_01_insert_oracle():
    gen = SeedState(SEED, 1).generator()
    t0 = time.perf_counter()
    ok, detail = check_insert_oracle(gen, 1000)
    dt = time.perf_counter() - t0
    record(1, ok and dt < 60, f"{detail}, {dt:.1f} s (budget 60 s)")


def test_02_minimax():
    ok, detail = check_minimax(SeedState(SEED, 2).generator(), 200)
    record(2, ok, detail)


def test_03_degree():
    ok, detail = check_degree(SeedState(SEED, 3).generator(), 1000)
    record(3, ok, detail)


def test_04_wall_implies_radius():
    ok, detail = check_wall_radius(SeedState(SEED, 4).generator(), 1000)
    record(4, ok, detail)


# ---------------------------------------------------------------------- 5

def test_05_wall_tail():
    reps = 10_000
    us = [1, 2, 3, 4, 5]
    fail = []
    for u in us:
        W = Region.cube((0.0, 0.0), 2.0 * u)
        gen = SeedState(SEED, 50 + u).generator()
        miss = 0
        for _ in range(reps):
            c = sample_poisson(W, 1.0, gen)
            miss += not wall_event(c, [0.0, 0.0], float(u), W)
        fail.append(miss / reps)
    p = np.asarray(fail)
    if np.any(p == 0):
        record(5, False, f"P[no wall] hit 0 for some u: {p.tolist()}")
    slope, r2 = line_fit(np.square(us), np.log(p))
    record(5, slope < 0 and r2 >= 0.95,
           f"P[no wall] = {[round(float(v), 4) for v in p]}, log-fit vs u^2 slope {slope:.4f}, R^2 {r2:.3f} (need >= 0.95)")


# ---------------------------------------------------------------------- 6

def test_06_onng_strong_stabilization():
    n = 16
    pair = TwoScalePair.for_scale(n, 0.5, 2)
    F = FunctionalSpec.onng_length()
    gen = SeedState(SEED, 6).generator()
    x = np.zeros(2)
    inradius = pair.local_scale
    held = bad = 0
    fixed = []
    for _ in range(1000):
        c = sample_marked_poisson(pair.outer, 1.0, MarkKind.TIME, gen)
        t = float(gen.uniform(np.nextafter(0.0, 1.0), 1.0))
        if onng_stabilization_radius(c, x, t) <= inradius:
            held += 1
            bad += two_scale_discrepancy(F, c, pair, x, t) != 0.0
        fixed.append(onng_stabilization_radius(c, x, 0.5))
    us = [2.0, 4.0, 6.0, 8.0, 10.0]
    tail = estimate_radius_tail(RadiusSample(np.asarray(fixed)), us)
    p = np.array([q for _, q, _ in tail])
    pos = p > 0
    slope, r2 = line_fit(np.square(us)[pos], np.log(p[pos])) if pos.sum() >= 3 else (math.nan, math.nan)
    ok = bad == 0 and held > 0 and slope < 0 and r2 >= 0.9
    record(6, ok, f"{held} replicas with R <= b_n, {bad} nonzero discrepancies; tail at t=0.5 "
                  f"P[R>u] = {[round(float(v), 4) for v in p]}, slope {slope:.4f}, R^2 {r2:.3f} (need >= 0.9)")


# ------------------------------------------------------------------ 7 and 8

def test_07_mst_clt_trend():
    rep, dt = campaign("mst")
    dk = [r.d_k for r in rep.rows]
    se = [r.extra["d_k_se"] for r in rep.rows]
    inv = [(k, dk[k + 1] - dk[k], 2 * math.hypot(se[k], se[k + 1])) for k in range(len(dk) - 1) if dk[k + 1] > dk[k]]
    trend_ok = len(inv) <= 1 and all(rise <= lim for _, rise, lim in inv)
    ok = dk[-1] < 0.08 and trend_ok and dt < 900
    inv_s = ", ".join(f"n={GRID[k]}->{GRID[k + 1]} +{rise:.4f} (2SE {lim:.4f})" for k, rise, lim in inv) or "none"
    record(7, ok, f"d_K = {[round(float(v), 4) for v in dk]}, d_K(32) = {dk[-1]:.4f} (< 0.08); "
                  f"inversions: {inv_s} (at most one, within 2 SE); {dt:.0f} s (budget 900 s)")


def test_08_variance_scaling():
    parts, ok = [], True
    for name in ("mst", "onng", "components"):
        rep, _ = campaign(name)
        slope, _, _ = variance_scaling_fit([(r.n, r.variance) for r in rep.rows])
        ok &= 1.7 <= slope <= 2.3
        parts.append(f"{name} {slope:.3f}")
    record(8, ok, "variance slopes " + ", ".join(parts) + " (need [1.7, 2.3])")


# ---------------------------------------------------------------------- 9

def test_09_psi_decay():
    rep, _ = campaign("psi")
    psi = [r.psi_sup for r in rep.rows]
    se = [r.extra["psi_se"] for r in rep.rows]
    rises = [(k, psi[k + 1] - psi[k], 2 * math.hypot(se[k], se[k + 1])) for k in range(len(psi) - 1)]
    worst = [f"n={GRID[k]}->{GRID[k + 1]} +{d:.4f} > {lim:.4f}" for k, d, lim in rises if d > lim]
    deg, _ = campaign("psi_degenerate")
    zero = all(m == 0.0 for r in deg.rows for m in r.extra["site_means"]) and all(r.psi_sup == 0.0 for r in deg.rows)
    record(9, not worst and zero, f"psi = {[round(float(v), 4) for v in psi]}, se = {[round(float(v), 4) for v in se]}; "
                                  f"violations: {worst or 'none'}; b_n = n gives exact 0: {zero}")


# --------------------------------------------------------------------- 10

def test_10_two_arm_inclusion():
    rep, _ = campaign("two_arm")
    e = rep.rows[0].extra
    record(10, e["counterexamples"] == 0,
           f"{e['steps']} steps, {e['mismatches']} mismatches, {e['tested_u']} tested u, "
           f"{e['counterexamples']} counterexamples, {e['untestable']} untestable mismatch steps, "
           f"{e['monotonicity_violations']} monotonicity violations")


# --------------------------------------------------------------------- 11

def test_11_component_bounds():
    ok, detail = check_component_bound(SeedState(SEED, 11).generator(), 10_000)
    record(11, ok, detail)


# --------------------------------------------------------------------- 12

def test_12_shot_noise_geometry():
    h = 0.02
    kernel = sn.KernelSpec.polynomial(1.0, 3.0)
    src = PointConfiguration(np.zeros((1, 2)), np.array([1.0]), MarkKind.SIGN)
    grid = sn.Grid(Region.cube((0.0, 0.0), 2.0), h)
    field = sn.sample_grid(sn.FieldSample(src, kernel), grid, gradients=True)
    vol = sn.excursion_volume(field, 1 / 8, grid)
    per = sn.perimeter_marching(field, 1 / 8, grid)
    test = sn.SmoothTest(0.05, 0.6)
    lhs = sn.smoothed_perimeter(field, test, grid)
    from scipy import integrate
    rhs, _ = integrate.quad(lambda u: test.phi(u) * sn.perimeter_marching(field, u, grid), test.a, test.b,
                            limit=200)
    coarea = abs(lhs - rhs) / rhs

    gen = SeedState(SEED, 12).generator()
    c = sample_marked_poisson(Region.cube((0.0, 0.0), 3.0), 1.0, MarkKind.SIGN, gen)
    fs = sn.FieldSample(c, kernel)
    worst, probes, step = 0.0, 0, 1e-5
    while probes < 1000:
        x = gen.uniform(-3, 3, size=2)
        if np.min(np.linalg.norm(c.points - x, axis=1)) < 1e-2:
            continue  # the kernel has a cone point at each source
        probes += 1
        g = sn.eval_gradient(fs, x)
        fd = np.array([(sn.eval_field(fs, x + step * e) - sn.eval_field(fs, x - step * e)) / (2 * step)
                       for e in np.eye(2)])
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(fd)))
    ok = abs(vol - math.pi) <= 5 * h and abs(per - 2 * math.pi) <= 0.03 * 2 * math.pi and coarea <= 0.05 \
        and worst <= 1e-6
    record(12, ok, f"volume {vol:.4f} (pi +- {5 * h}), perimeter {per:.4f} (2pi +- 3%), coarea rel. gap "
                   f"{coarea:.4f} (<= 5%), gradient worst rel. error {worst:.2e} over {probes} probes (<= 1e-6)")


# --------------------------------------------------------------------- 13

def test_13_statistics_exactness():
    n = 1000
    e1 = abs(empirical_dk(ndtri((np.arange(1, n + 1) - 0.5) / n)) - 1 / (2 * n))
    e2 = abs(empirical_dw([0.0]) - math.sqrt(2 / math.pi))
    cov = covariance_matrix(SeedState(SEED, 13).generator().normal(size=(1000, 5)))
    sym = bool(np.array_equal(cov, cov.T))
    record(13, e1 <= 1e-12 and e2 <= 1e-6 and sym, f"d_K error {e1:.2e} (<= 1e-12), d_W error {e2:.2e} (<= 1e-6), "
                                                   f"covariance exactly symmetric: {sym}")


# --------------------------------------------------------------------- 14

def test_14_determinism():
    same, names = [], list(CAMPAIGNS)
    for name in names:
        a, _ = campaign(name, 1)
        b, _ = campaign(name, 8)
        same.append(report_csv(a) == report_csv(b) and report_json(a) == report_json(b))
    differ = [n for n, s in zip(names, same) if not s]
    record(14, not differ, f"{len(names)} campaigns rerun with 8 workers vs 1; byte-different reports: "
                           f"{differ or 'none'}")


if __name__ == "__main__":
    import sys
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for fn in tests:
        try:
            fn()
        except AssertionError:
            pass
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
