"""Campaign reports: fixed CSV columns, a JSON mirror with metadata, and a
timing sidecar kept apart so reports stay byte-reproducible."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

CSV_COLUMNS = ("experiment", "n", "replicas", "mean", "variance", "var_per_volume", "d_k", "d_w", "psi_sup", "notes")
_FLOATS = ("mean", "variance", "var_per_volume", "d_k", "d_w", "psi_sup")


def fmt(x) -> str:
    """17 significant digits, C locale; ``None`` becomes an empty field."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def _parse(s: str):
    return None if s == "" else float(s)


@dataclass
class Row:
    experiment: str
    n: float
    replicas: int
    mean: Optional[float] = None
    variance: Optional[float] = None
    var_per_volume: Optional[float] = None
    d_k: Optional[float] = None
    d_w: Optional[float] = None
    psi_sup: Optional[float] = None
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def csv_fields(self) -> list:
        return [self.experiment, fmt(self.n), str(int(self.replicas))] + [fmt(getattr(self, k)) for k in _FLOATS] \
            + [self.notes]

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in CSV_COLUMNS}
        d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Row":
        return cls(**d)


@dataclass
class Report:
    spec: dict
    spec_hash: str
    seed: int
    version: str
    rows: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)  # sidecar only, never in the report bytes

    def to_dict(self) -> dict:
        return {
            "metadata": {"spec": self.spec, "spec_hash": self.spec_hash, "seed": self.seed, "version": self.version},
            "columns": list(CSV_COLUMNS),
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        m = d["metadata"]
        return cls(m["spec"], m["spec_hash"], m["seed"], m["version"], [Row.from_dict(r) for r in d["rows"]])

    def __eq__(self, other) -> bool:
        return isinstance(other, Report) and self.to_dict() == other.to_dict()


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def report_json(report: Report) -> str:
    # floats go through repr, which is shortest round-trip and locale-free
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def read_csv_rows(text: str) -> list:
    rd = csv.reader(io.StringIO(text))
    header = next(rd)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for f in rd:
        vals = dict(zip(CSV_COLUMNS, f))
        rows.append(Row(vals["experiment"], float(vals["n"]), int(vals["replicas"]),
                        *(_parse(vals[k]) for k in _FLOATS), notes=vals["notes"]))
    return rows


def report_stem(report: Report) -> str:
    # the hash in the name keeps a changed spec from picking up an old report
    return f"{report.spec.get('experiment', 'report')}-{report.spec_hash[:12]}"


def write_report(report: Report, out_dir, fmt_: str = "csv") -> list:
    """Write the report (CSV plus metadata JSON, or a single JSON) and the
    timing sidecar.  Returns the written paths."""
    if fmt_ not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        stem = report_stem(report)
        paths = []
        if fmt_ == "csv":
            p = out / f"{stem}.csv"
            p.write_text(report_csv(report), encoding="utf-8", newline="")
            meta = out / f"{stem}.meta.json"
            meta.write_text(json.dumps(report.to_dict()["metadata"], indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
            paths += [p, meta]
        else:
            p = out / f"{stem}.json"
            p.write_text(report_json(report), encoding="utf-8")
            paths.append(p)
        t = out / f"{stem}.timings.json"
        t.write_text(json.dumps(report.timings, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(t)
    except OSError as e:
        raise OSError(f"cannot write report to {e.filename or out}: {e.strerror}") from e
    return paths


def read_report_json(path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
