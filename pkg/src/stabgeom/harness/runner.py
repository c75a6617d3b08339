"""Run an :class:`ExperimentSpec` and aggregate its replicas into a Report.

Replica ``k`` at the ``i``-th window scale draws from stream
``i * 1_000_000 + k`` of the root seed, so every row is reproducible from
(spec, seed) whatever the worker count.
"""
from __future__ import annotations

import time
from functools import partial

import numpy as np

import stabgeom
from stabgeom import shot_noise as sn
from stabgeom.graphs.components import component_count
from stabgeom.graphs.mst import build_mst_kruskal, mst_length
from stabgeom.graphs.onng import build_onng, onng_length
from stabgeom.graphs.weights import WeightFunction
from stabgeom.harness.report import Report, Row, fmt
from stabgeom.harness.spec import ExperimentSpec, spec_to_dict
from stabgeom.parallel import map_ordered
from stabgeom.point_process import MarkKind, Region, SeedState, Shape, sample_marked_poisson, sample_poisson
from stabgeom.stabilization.functionals import FunctionalSpec
from stabgeom.stabilization.radii import (MIN_TAIL_SAMPLES, RadiusSample, estimate_radius_tail,
                                          mst_attachment_radius, onng_stabilization_radius)
from stabgeom.stabilization.two_arm import check_two_arm_inclusion
from stabgeom.stabilization.two_scale import TwoScalePair, estimate_psi, site_grid
from stabgeom.stats import covariance_report, metric_report

__all__ = ["run_experiment", "replica_values", "ReplicaError", "STREAM_STRIDE", "DEFAULT_MULTI_WEIGHTS"]

STREAM_STRIDE = 1_000_000
_BOOT_STREAM = 999 * STREAM_STRIDE

DEFAULT_MULTI_WEIGHTS = ({"kind": "identity"}, {"kind": "power", "alpha": 2.0}, {"kind": "indicator_le", "r": 1.0})


class ReplicaError(RuntimeError):
    def __init__(self, seed: SeedState, cause: BaseException):
        super().__init__(f"replica with seed (root={seed.root_seed}, stream={seed.stream_index}) failed: "
                         f"{type(cause).__name__}: {cause}")
        self.seed = seed


def _outer(spec: ExperimentSpec, n: float) -> Region:
    return Region(Shape(spec.shape), (0.0,) * spec.dimension, float(n) * spec.base_scale)


def _pair(spec: ExperimentSpec, n: float) -> TwoScalePair:
    return TwoScalePair.for_scale(n, spec.alpha, spec.dimension, Shape(spec.shape), spec.base_scale, spec.theta,
                                  spec.degenerate)


def _cutoff(spec: ExperimentSpec, kernel: sn.KernelSpec):
    if spec.cutoff is not None:
        return spec.cutoff
    if kernel.family == "gaussian":
        return sn.default_cutoff(kernel, spec.dimension, spec.intensity)
    return None


# ------------------------------------------------------------ replica bodies

def _clt_value(spec: ExperimentSpec, n: float, gen: np.random.Generator):
    W = _outer(spec, n)
    e = spec.experiment
    if e == "mst_clt":
        return mst_length(build_mst_kruskal(sample_poisson(W, spec.intensity, gen)),
                          WeightFunction.from_dict(spec.weight))
    if e == "mst_multivariate":
        tree = build_mst_kruskal(sample_poisson(W, spec.intensity, gen))
        ws = spec.weights or DEFAULT_MULTI_WEIGHTS
        return [mst_length(tree, WeightFunction.from_dict(w)) for w in ws]
    if e == "onng_clt":
        c = sample_marked_poisson(W, spec.intensity, MarkKind.TIME, gen)
        return onng_length(build_onng(c), WeightFunction.from_dict(spec.weight))
    if e == "components_clt":
        c = sample_poisson(W, spec.intensity, gen)
        return float(component_count(c, spec.r)) if len(c) else 0.0
    if e == "shotnoise_clt":
        c = sample_marked_poisson(W, spec.intensity, MarkKind.SIGN, gen)
        kernel = sn.KernelSpec.from_dict(spec.kernel)
        fs = sn.FieldSample(c, kernel, _cutoff(spec, kernel))
        grid = sn.Grid(W, spec.grid_spacing)
        test = sn.SmoothTest(**spec.test)
        f = spec.functional or "excursion_volume"
        if f == "excursion_volume":
            return sn.excursion_volume(fs, spec.level, grid)
        if f == "smoothed_volume":
            return sn.smoothed_volume(fs, test, grid)
        return sn.smoothed_perimeter(fs, test, grid)
    raise ValueError(e)


def _radius_value(spec: ExperimentSpec, n: float, gen: np.random.Generator):
    W = _outer(spec, n)
    x = np.zeros(spec.dimension)
    if spec.radius == "onng":
        c = sample_marked_poisson(W, spec.intensity, MarkKind.TIME, gen)
        t = spec.mark if spec.mark is not None else float(gen.uniform(np.nextafter(0.0, 1.0), 1.0))
        return onng_stabilization_radius(c, x, t)
    c = sample_poisson(W, spec.intensity, gen)
    return mst_attachment_radius(c, x, W) if len(c) else 0.0


def _two_arm_value(spec: ExperimentSpec, n: float, gen: np.random.Generator):
    pair = _pair(spec, n)
    c = sample_poisson(pair.outer, spec.intensity, gen)
    x = np.asarray(site_grid(pair, 1, spec.full_window)[0])
    chk = check_two_arm_inclusion(c, x, pair.outer, pair.inner_region(x))
    mism = len(chk.mismatches)
    fired = sum(1 for m in chk.mismatches for f in m.fired if f)
    tested = sum(len(m.fired) for m in chk.mismatches)
    return [chk.steps_compared, mism, tested, fired, chk.counterexamples, chk.untestable,
            chk.monotonicity_violations]


_BODIES = {"radius_tails": _radius_value, "two_arm_frequency": _two_arm_value}


def _replica(k: int, spec: ExperimentSpec, n: float, n_index: int):
    seed = SeedState(spec.seed, n_index * STREAM_STRIDE + k)
    try:
        return _BODIES.get(spec.experiment, _clt_value)(spec, n, seed.generator())
    except Exception as e:  # noqa: BLE001 - re-raised with the replica seed
        raise ReplicaError(seed, e) from e


# ---------------------------------------------------------------- rows

def _clt_row(spec, name, n, n_index, values: np.ndarray, volume: float, notes: list) -> Row:
    var = float(values.var(ddof=1))
    row = Row(name, n, len(values), float(values.mean()), var, var / volume)
    if var > 0:
        gen = SeedState(spec.seed, _BOOT_STREAM + n_index).generator()
        m = metric_report(values, spec.bootstrap, gen)
        row.d_k, row.d_w = m.d_K, m.d_W
        if m.d_K_se is not None:
            row.extra["d_k_se"] = m.d_K_se
            notes.append(f"d_k_se={fmt(m.d_K_se)}")
    else:
        notes.append("degenerate")
    row.notes = ";".join(notes)
    return row


def _psi_functional(spec: ExperimentSpec) -> FunctionalSpec:
    f = spec.functional or "component_count"
    if f == "component_count":
        return FunctionalSpec.component_count(spec.r)
    if f == "mst_length":
        return FunctionalSpec.mst_length(WeightFunction.from_dict(spec.weight))
    return FunctionalSpec.onng_length(WeightFunction.from_dict(spec.weight))


def _rows_for(spec: ExperimentSpec, n, n_index: int, threads: int) -> list:
    e = spec.experiment
    volume = _outer(spec, n).volume()
    if e == "psi_decay":
        pair = _pair(spec, n)
        sites = site_grid(pair, spec.sites_per_axis, spec.full_window)
        est = estimate_psi(_psi_functional(spec), pair, sites, spec.replicas, SeedState(spec.seed, n_index * STREAM_STRIDE),
                           spec.intensity, threads)
        top = est.sup_site
        j = est.per_site.index(top)
        col = est.values[:, j]
        var = float(col.var(ddof=1))
        row = Row(e, n, spec.replicas, top.mean, var, var / volume, None, None, est.sup_estimate)
        row.extra = {"psi_se": top.stderr, "b_n": pair.inner_scale, "sites": len(sites),
                     "site_means": [s.mean for s in est.per_site], "site_se": [s.stderr for s in est.per_site]}
        row.notes = f"b_n={fmt(pair.inner_scale)};psi_se={fmt(top.stderr)};sites={len(sites)}"
        return [row]

    fn = partial(_replica, spec=spec, n=n, n_index=n_index)
    out = map_ordered(fn, range(spec.replicas), threads)

    if e == "radius_tails":
        v = np.asarray(out, dtype=float)
        censored = ~np.isfinite(v)
        cap = 2.0 * float(n) * spec.base_scale
        sample = RadiusSample(np.where(censored, cap, v), censored)
        fin = v[~censored]
        row = Row(e, n, len(v), float(fin.mean()) if len(fin) else None,
                  float(fin.var(ddof=1)) if len(fin) > 1 else None)
        if row.variance is not None:
            row.var_per_volume = row.variance / volume
        notes = [f"radius={spec.radius}", f"censored={int(censored.sum())}"]
        try:
            tail = estimate_radius_tail(sample, spec.thresholds)
            row.extra["tail"] = [list(t) for t in tail]
            notes.append("tail=" + "|".join(f"{fmt(u)}:{fmt(p)}:{fmt(s)}" for u, p, s in tail))
        except ValueError:
            notes.append(f"tail=fewer than {MIN_TAIL_SAMPLES} uncensored radii")
        row.notes = ";".join(notes)
        return [row]

    if e == "two_arm_frequency":
        a = np.asarray(out, dtype=np.int64)
        has = (a[:, 1] > 0).astype(float)
        tot = a.sum(axis=0)
        var = float(has.var(ddof=1))
        keys = ("steps", "mismatches", "tested_u", "fired", "counterexamples", "untestable", "monotonicity_violations")
        row = Row(e, n, len(a), float(has.mean()), var, var / volume)
        row.extra = {k: int(t) for k, t in zip(keys, tot)}
        row.extra["b_n"] = spec.inner_scale(n)
        row.notes = ";".join(f"{k}={int(t)}" for k, t in zip(keys, tot))
        return [row]

    if e == "mst_multivariate":
        rows_v = np.asarray(out, dtype=float)
        ws = spec.weights or DEFAULT_MULTI_WEIGHTS
        cov = covariance_report(rows_v)
        scaled = cov.matrix / volume
        rows = []
        for i, w in enumerate(ws):
            wf = WeightFunction.from_dict(w)
            notes = [f"coord={i}", f"weight={wf.kind}", "cov_per_volume=" + " ".join(fmt(c) for c in scaled[i])]
            if i == 0:
                notes.append(f"psd={'yes' if cov.is_psd else 'no'}")
            row = _clt_row(spec, e, n, n_index, rows_v[:, i], volume, notes)
            row.extra.update({"coord": i, "weight": wf.to_dict(), "cov_per_volume": scaled[i].tolist()})
            rows.append(row)
        return rows

    return [_clt_row(spec, e, n, n_index, np.asarray(out, dtype=float), volume, [])]


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> Report:
    """Run every window scale of ``spec`` and return the aggregated report.
    Timings are recorded on the report but never serialized with it."""
    report = Report(spec_to_dict(spec), spec.spec_hash, spec.seed, stabgeom.__version__)
    for i, n in enumerate(spec.n):
        t0 = time.perf_counter()
        report.rows.extend(_rows_for(spec, n, i, threads))
        report.timings[fmt(n)] = round(time.perf_counter() - t0, 6)
    return report


def replica_values(spec: ExperimentSpec, n, n_index: int = 0, threads: int = 1) -> list:
    """Raw per-replica outputs at one window scale (not for psi_decay)."""
    if spec.experiment == "psi_decay":
        raise ValueError("psi_decay has no per-replica scalar")
    return map_ordered(partial(_replica, spec=spec, n=n, n_index=n_index), range(spec.replicas), threads)

