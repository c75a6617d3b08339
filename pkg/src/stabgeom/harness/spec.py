"""Experiment specifications: a flat JSON document, validated fail-closed."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

EXPERIMENTS = (
    "onng_clt",
    "mst_clt",
    "mst_multivariate",
    "components_clt",
    "shotnoise_clt",
    "psi_decay",
    "radius_tails",
    "two_arm_frequency",
)

PSI_FUNCTIONALS = ("component_count", "mst_length", "onng_length")
SHOTNOISE_FUNCTIONALS = ("excursion_volume", "smoothed_volume", "smoothed_perimeter")
RADII = ("onng", "mst_attachment")

DEFAULT_N = (8, 12, 16, 24, 32)


class SpecError(ValueError):
    """Invalid experiment specification.  ``field`` names the offending key."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None,
                 column: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line
        self.column = column


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    dimension: int = 2
    n: tuple = DEFAULT_N
    alpha: float = 0.5
    degenerate: bool = False
    replicas: int = 200
    seed: int = 0
    intensity: float = 1.0
    shape: str = "cube"
    base_scale: float = 1.0
    theta: Optional[float] = None
    weight: dict = field(default_factory=lambda: {"kind": "identity"})
    weights: tuple = ()
    r: float = 0.8
    functional: Optional[str] = None
    kernel: dict = field(default_factory=lambda: {"family": "gaussian", "amplitude": 1.0, "bandwidth": 1.0})
    cutoff: Optional[float] = None
    level: float = 0.5
    test: dict = field(default_factory=lambda: {"a": 0.25, "b": 0.75, "c": 1.0})
    grid_spacing: float = 0.25
    sites_per_axis: int = 3
    full_window: bool = False
    radius: str = "onng"
    mark: Optional[float] = None
    thresholds: tuple = (1.0, 2.0, 3.0, 4.0, 5.0)
    bootstrap: int = 0
    out_dir: Optional[str] = None
    format: str = "csv"

    def canonical(self) -> str:
        return json.dumps(spec_to_dict(self), sort_keys=True, separators=(",", ":"))

    @property
    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def inner_scale(self, n: float) -> float:
        return float(n) if self.degenerate else float(n) ** self.alpha


_FIELDS = {f.name for f in fields(ExperimentSpec)}


def _num(d, key, cast=float, positive=False, nonneg=False, label=None):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{label or key} must be a number", key)
    if cast is int and float(v) != int(v):
        raise SpecError(f"{label or key} must be an integer", key)
    v = cast(v)
    if not math.isfinite(v):
        raise SpecError(f"{label or key} must be finite", key)
    if positive and not v > 0:
        raise SpecError(f"{label or key} must be positive", key)
    if nonneg and v < 0:
        raise SpecError(f"{label or key} must be non-negative", key)
    return v


def _bool(d, key):
    if not isinstance(d[key], bool):
        raise SpecError(f"{key} must be true or false", key)
    return d[key]


def spec_from_dict(d: dict) -> ExperimentSpec:
    if not isinstance(d, dict):
        raise SpecError("specification must be a JSON object")
    unknown = sorted(set(d) - _FIELDS)
    if unknown:
        raise SpecError(f"unknown key(s): {', '.join(unknown)}", unknown[0])
    if "experiment" not in d:
        raise SpecError("missing required key 'experiment'", "experiment")
    exp = d["experiment"]
    if exp not in EXPERIMENTS:
        raise SpecError(f"experiment must be one of {', '.join(EXPERIMENTS)}", "experiment")
    kw: dict = {"experiment": exp}
    if "dimension" in d:
        kw["dimension"] = _num(d, "dimension", int)
        if kw["dimension"] not in (1, 2, 3):
            raise SpecError("dimension must be 1, 2 or 3", "dimension")
    if "n" in d:
        ns = d["n"]
        if not isinstance(ns, list) or not ns:
            raise SpecError("n must be a non-empty list of window scales", "n")
        vals = [_num({"n": v}, "n", positive=True, label="window scale") for v in ns]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise SpecError("window scales n must be strictly increasing", "n")
        kw["n"] = tuple(int(v) if float(v).is_integer() else v for v in vals)
    if "alpha" in d:
        a = _num(d, "alpha", label="inner scale exponent alpha")
        if not 0 < a < 1:
            raise SpecError(f"inner scale exponent alpha must lie in (0, 1), got {a}", "alpha")
        kw["alpha"] = a
    for key in ("degenerate", "full_window"):
        if key in d:
            kw[key] = _bool(d, key)
    if "replicas" in d:
        kw["replicas"] = _num(d, "replicas", int)
        if kw["replicas"] < 30:
            raise SpecError("replicas must be at least 30", "replicas")
    if "seed" in d:
        kw["seed"] = _num(d, "seed", int, nonneg=True)
        if kw["seed"] >= 2**64:
            raise SpecError("seed must fit in 64 bits", "seed")
    for key in ("intensity", "base_scale", "r", "grid_spacing"):
        if key in d:
            kw[key] = _num(d, key, positive=True)
    for key in ("theta", "cutoff"):
        if key in d and d[key] is not None:
            kw[key] = _num(d, key, positive=True)
    if "level" in d:
        kw["level"] = _num(d, "level")
    if "mark" in d and d["mark"] is not None:
        t = _num(d, "mark")
        if not 0 < t < 1:
            raise SpecError("mark must lie in (0, 1)", "mark")
        kw["mark"] = t
    for key in ("sites_per_axis", "bootstrap"):
        if key in d:
            kw[key] = _num(d, key, int, nonneg=True)
    if kw.get("sites_per_axis", 1) < 1:
        raise SpecError("sites_per_axis must be at least 1", "sites_per_axis")
    if "shape" in d:
        if d["shape"] not in ("cube", "ball"):
            raise SpecError("shape must be 'cube' or 'ball'", "shape")
        kw["shape"] = d["shape"]
    if "format" in d:
        if d["format"] not in ("csv", "json"):
            raise SpecError("format must be 'csv' or 'json'", "format")
        kw["format"] = d["format"]
    if "out_dir" in d and d["out_dir"] is not None:
        if not isinstance(d["out_dir"], str):
            raise SpecError("out_dir must be a string", "out_dir")
        kw["out_dir"] = d["out_dir"]
    if "radius" in d:
        if d["radius"] not in RADII:
            raise SpecError(f"radius must be one of {', '.join(RADII)}", "radius")
        kw["radius"] = d["radius"]
    if "thresholds" in d:
        th = d["thresholds"]
        if not isinstance(th, list) or not th:
            raise SpecError("thresholds must be a non-empty list", "thresholds")
        kw["thresholds"] = tuple(_num({"thresholds": v}, "thresholds") for v in th)
    if "functional" in d and d["functional"] is not None:
        allowed = PSI_FUNCTIONALS + SHOTNOISE_FUNCTIONALS
        if d["functional"] not in allowed:
            raise SpecError(f"functional must be one of {', '.join(allowed)}", "functional")
        kw["functional"] = d["functional"]
    for key in ("weight", "kernel", "test"):
        if key in d:
            if not isinstance(d[key], dict):
                raise SpecError(f"{key} must be a JSON object", key)
            kw[key] = dict(d[key])
    if "weights" in d:
        if not isinstance(d["weights"], list) or not all(isinstance(w, dict) for w in d["weights"]):
            raise SpecError("weights must be a list of weight objects", "weights")
        kw["weights"] = tuple(dict(w) for w in d["weights"])
    spec = ExperimentSpec(**kw)
    _check_semantics(spec)
    return spec


def _check_semantics(spec: ExperimentSpec) -> None:
    # build the objects once so bad parameter blocks fail at parse time
    from stabgeom.graphs.weights import WeightFunction
    from stabgeom.shot_noise import KernelSpec, SmoothTest

    try:
        WeightFunction.from_dict(spec.weight)
    except (KeyError, TypeError, ValueError) as e:
        raise SpecError(f"bad weight: {e}", "weight") from None
    for w in spec.weights:
        try:
            WeightFunction.from_dict(w)
        except (KeyError, TypeError, ValueError) as e:
            raise SpecError(f"bad weight in weights: {e}", "weights") from None
    try:
        KernelSpec.from_dict(spec.kernel).check_dim(spec.dimension)
    except (KeyError, TypeError, ValueError) as e:
        raise SpecError(f"bad kernel: {e}", "kernel") from None
    try:
        SmoothTest(**spec.test)
    except (TypeError, ValueError) as e:
        raise SpecError(f"bad smooth test: {e}", "test") from None
    f = spec.functional
    if spec.experiment == "psi_decay" and f is not None and f not in PSI_FUNCTIONALS:
        raise SpecError(f"psi_decay functional must be one of {', '.join(PSI_FUNCTIONALS)}", "functional")
    if spec.experiment == "shotnoise_clt" and f is not None and f not in SHOTNOISE_FUNCTIONALS:
        raise SpecError(f"shotnoise_clt functional must be one of {', '.join(SHOTNOISE_FUNCTIONALS)}", "functional")
    if spec.experiment not in ("psi_decay", "shotnoise_clt") and f is not None:
        raise SpecError(f"functional is not used by {spec.experiment}", "functional")
    if spec.experiment == "mst_multivariate" and len(spec.weights) == 1:
        raise SpecError("mst_multivariate needs at least 2 weights", "weights")
    if not spec.degenerate and spec.experiment in ("psi_decay", "two_arm_frequency"):
        theta = spec.theta if spec.theta is not None else 1.1 * spec.base_scale
        for n in spec.n:
            if theta * spec.inner_scale(n) >= n * spec.base_scale:
                raise SpecError(f"shrunk window is empty at n = {n}; lower theta or alpha", "theta")


def parse_spec(text: str) -> ExperimentSpec:
    """Parse and validate a JSON experiment document."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}", None, e.lineno,
                        e.colno) from None
    return spec_from_dict(d)


def spec_to_dict(spec: ExperimentSpec) -> dict:
    d = asdict(spec)
    d["n"] = list(spec.n)
    d["thresholds"] = list(spec.thresholds)
    d["weights"] = [dict(w) for w in spec.weights]
    return d


def emit_spec(spec: ExperimentSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n"
