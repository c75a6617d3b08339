"""Invariant suite behind ``stabgeom verify``: brute-force oracles and the
inclusion properties, on small random instances."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from stabgeom.graphs.components import adjacent_components, component_count
from stabgeom.graphs.mst import build_mst_kruskal, max_degree, mst_insert, verify_minimax
from stabgeom.point_process import PointConfiguration, Region, SeedState, add_point, sample_poisson
from stabgeom.stabilization.radii import mst_attachment_radius, wall_event
from stabgeom.stats import covariance_matrix, empirical_dk, empirical_dw


def _edge_set(tree) -> set:
    return {(min(int(i), int(j)), max(int(i), int(j))) for i, j in tree.edges}


def check_insert_oracle(gen, count: int) -> tuple:
    bad = 0
    for _ in range(count):
        d = int(gen.integers(2, 4))
        m = int(gen.integers(5, 201))
        pts = gen.uniform(-1, 1, size=(m, d))
        c = PointConfiguration(pts)
        x = gen.uniform(-1, 1, size=d)
        tree, _ = mst_insert(build_mst_kruskal(c), x)
        ref = build_mst_kruskal(add_point(c, x))
        bad += _edge_set(tree) != _edge_set(ref)
    return bad == 0, f"{count} instances, {bad} mismatches"


def check_minimax(gen, count: int) -> tuple:
    bad = 0
    for _ in range(count):
        m = int(gen.integers(2, 11))
        c = PointConfiguration(gen.uniform(-1, 1, size=(m, 2)))
        bad += not verify_minimax(build_mst_kruskal(c), mode="exhaustive").passed
    return bad == 0, f"{count} trees, {bad} violations"


def check_degree(gen, count: int, points: int = 200) -> tuple:
    worst = 0
    for _ in range(count):
        c = PointConfiguration(gen.uniform(-1, 1, size=(points, 2)))
        worst = max(worst, max_degree(build_mst_kruskal(c)))
    return worst <= 6, f"{count} trees of {points} points, max degree {worst}"


def check_wall_radius(gen, count: int) -> tuple:
    held = viol = 0
    tries = 0
    while held < count and tries < 50 * count:
        tries += 1
        u = float(gen.uniform(2.0, 6.0))
        W = Region.cube((0.0, 0.0), u)
        c = sample_poisson(W, 2.0, gen)
        x = np.zeros(2)
        if len(c) and wall_event(c, x, u, W):
            held += 1
            viol += mst_attachment_radius(c, x, W) > u
    return viol == 0 and held == count, f"{held} wall instances, {viol} violations"


def check_component_bound(gen, count: int) -> tuple:
    bad = 0
    for _ in range(count):
        m = int(gen.integers(0, 40))
        r = float(gen.uniform(0.05, 0.6))
        c = PointConfiguration(gen.uniform(0, 2, size=(m, 2)))
        x = gen.uniform(0, 2, size=2)
        before = component_count(c, r) if m else 0
        after = component_count(add_point(c, x), r)
        diff = after - before
        adj = adjacent_components(c, x, r) if m else 0
        bad += not (diff <= 1 and diff >= -adj)
    return bad == 0, f"{count} triples, {bad} violations"


def check_stats() -> tuple:
    n = 1000
    q = ndtri((np.arange(1, n + 1) - 0.5) / n)
    e1 = abs(empirical_dk(q) - 1 / (2 * n))
    e2 = abs(empirical_dw([0.0]) - math.sqrt(2 / math.pi))
    cov = covariance_matrix(np.random.default_rng(0).normal(size=(100, 4)))
    ok = e1 <= 1e-12 and e2 <= 1e-6 and np.array_equal(cov, cov.T)
    return ok, f"d_K error {e1:.3g}, d_W error {e2:.3g}, symmetric {np.array_equal(cov, cov.T)}"


def run_invariants(seed: int = 0, quick: bool = True) -> list:
    scale = 10 if quick else 1
    gen = SeedState(seed, 0).generator()
    return [
        ("mst_insert equals Kruskal", *check_insert_oracle(gen, 1000 // scale)),
        ("MST minimax property", *check_minimax(gen, 200 // scale)),
        ("MST degree at most 6 in the plane", *check_degree(gen, 1000 // scale)),
        ("wall implies attachment radius at most u", *check_wall_radius(gen, 1000 // scale)),
        ("component add-one cost bounds", *check_component_bound(gen, 10000 // scale)),
        ("statistics exactness", *check_stats()),
    ]
