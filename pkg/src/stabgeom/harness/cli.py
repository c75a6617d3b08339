"""Command line entry point: ``stabgeom <subcommand> ...``.

Exit codes: 0 success, 2 bad specification or arguments, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_SPEC, EXIT_RUNTIME = 0, 2, 3


def _window(args):
    from stabgeom.point_process import Region, Shape
    return Region(Shape(args.shape), (0.0,) * args.dim, float(args.n))


def _sample(args, marks: str = "none"):
    from stabgeom.point_process import MarkKind, SeedState, sample_marked_poisson, sample_poisson
    gen = SeedState(args.seed, 0).generator()
    W = _window(args)
    if marks == "none":
        return sample_poisson(W, args.intensity, gen)
    return sample_marked_poisson(W, args.intensity, MarkKind(marks), gen)


def _emit(args, summary: dict, table=None, header=None, name="out"):
    """Print a summary; with --out-dir also write the table as CSV or JSON."""
    if args.out_dir and table is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.format == "json":
            p = out / f"{name}.json"
            p.write_text(json.dumps({"summary": summary, "columns": header, "rows": table}, indent=2) + "\n")
        else:
            p = out / f"{name}.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(table)
        summary = dict(summary, written=str(p))
    print(json.dumps(summary, sort_keys=True))


def _fmt_rows(arr) -> list:
    return [["%.17g" % v for v in row] for row in np.atleast_2d(arr)]


def cmd_sample(args) -> int:
    c = _sample(args, args.marks)
    cols = [f"x{k}" for k in range(args.dim)]
    data = c.points if c.marks is None else np.column_stack([c.points, c.marks])
    if c.marks is not None:
        cols.append("mark")
    _emit(args, {"points": len(c), "dim": args.dim}, _fmt_rows(data) if len(c) else [], cols, "sample")
    return EXIT_OK


def cmd_mst(args) -> int:
    from stabgeom.graphs.mst import build_mst_kruskal, max_degree, mst_length
    from stabgeom.graphs.weights import WeightFunction
    c = _sample(args)
    tree = build_mst_kruskal(c)
    w = WeightFunction.power(args.alpha) if args.alpha != 1 else WeightFunction.identity()
    summary = {"points": len(c), "edges": len(tree.edges), "length": mst_length(tree, w),
               "max_degree": max_degree(tree)}
    _emit(args, summary, [[int(i), int(j)] for i, j in tree.edges], ["i", "j"], "mst")
    return EXIT_OK


def cmd_onng(args) -> int:
    from stabgeom.graphs.onng import build_onng, onng_length
    from stabgeom.graphs.weights import WeightFunction
    c = _sample(args, "time")
    tree = build_onng(c)
    w = WeightFunction.power(args.alpha) if args.alpha != 1 else WeightFunction.identity()
    summary = {"points": len(c), "edges": len(tree.edges), "length": onng_length(tree, w)}
    _emit(args, summary, [[int(i), int(j)] for i, j in tree.edges], ["i", "j"], "onng")
    return EXIT_OK


def cmd_components(args) -> int:
    from stabgeom.graphs.components import geometric_components
    c = _sample(args)
    lab = geometric_components(c, args.r) if len(c) else None
    count = lab.count if lab is not None else 0
    table = [[int(v)] for v in lab.labels] if lab is not None else []
    _emit(args, {"points": len(c), "r": args.r, "components": count}, table, ["label"], "components")
    return EXIT_OK


def cmd_shotnoise(args) -> int:
    from stabgeom import shot_noise as sn
    c = _sample(args, "sign")
    kernel = sn.KernelSpec.polynomial(args.c_g, args.delta) if args.kernel == "polynomial" \
        else sn.KernelSpec.gaussian(args.amplitude, args.bandwidth)
    cutoff = args.cutoff if args.cutoff else (sn.default_cutoff(kernel, args.dim, args.intensity)
                                              if kernel.family == "gaussian" else None)
    fs = sn.FieldSample(c, kernel, cutoff)
    grid = sn.Grid(_window(args), args.spacing)
    field = sn.sample_grid(fs, grid)
    summary = {"points": len(c), "grid_nodes": len(field.values), "h": grid.h, "level": args.level,
               "excursion_volume": sn.excursion_volume(field, args.level, grid)}
    if args.dim == 2:
        summary["perimeter"] = sn.perimeter_marching(field, args.level, grid)
    if args.dump_field:
        sn.write_field_csv(args.dump_field, grid, field.values)
        summary["field"] = args.dump_field
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_run(args) -> int:
    from stabgeom.harness.report import write_report
    from stabgeom.harness.runner import run_experiment
    from stabgeom.harness.spec import parse_spec
    spec = parse_spec(Path(args.spec).read_text())
    if args.seed is not None:
        from dataclasses import replace
        spec = replace(spec, seed=args.seed)
    report = run_experiment(spec, threads=args.threads)
    fmt_ = args.format or spec.format
    out_dir = args.out_dir or spec.out_dir or "."
    paths = write_report(report, out_dir, fmt_)
    print(json.dumps({"rows": len(report.rows), "spec_hash": report.spec_hash,
                      "written": [str(p) for p in paths]}, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    from stabgeom.harness.verify import run_invariants
    results = run_invariants(args.seed, quick=not args.full)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabgeom", description="Stabilization diagnostics for Poisson functionals.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root seed (default 0, or the spec's seed for run)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    window.add_argument("--n", type=float, default=8.0, help="window scale (half-side or radius)")
    window.add_argument("--shape", choices=("cube", "ball"), default="cube")
    window.add_argument("--intensity", type=float, default=1.0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common, window], help="sample a Poisson configuration")
    s.add_argument("--marks", choices=("none", "time", "sign"), default="none")
    s.set_defaults(fn=cmd_sample)
    s = sub.add_parser("mst", parents=[common, window], help="minimal spanning tree of a sample")
    s.add_argument("--alpha", type=float, default=1.0, help="edge weight |e|^alpha")
    s.set_defaults(fn=cmd_mst)
    s = sub.add_parser("onng", parents=[common, window], help="online nearest neighbour graph of a sample")
    s.add_argument("--alpha", type=float, default=1.0)
    s.set_defaults(fn=cmd_onng)
    s = sub.add_parser("components", parents=[common, window], help="components of the r-graph")
    s.add_argument("--r", type=float, default=0.8)
    s.set_defaults(fn=cmd_components)
    s = sub.add_parser("shotnoise", parents=[common, window], help="shot-noise field and its excursion set")
    s.add_argument("--kernel", choices=("polynomial", "gaussian"), default="gaussian")
    s.add_argument("--c-g", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=3.0)
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--bandwidth", type=float, default=1.0)
    s.add_argument("--cutoff", type=float, default=None)
    s.add_argument("--level", type=float, default=0.5)
    s.add_argument("--spacing", type=float, default=0.25)
    s.add_argument("--dump-field", default=None, help="write the grid field to this CSV path")
    s.set_defaults(fn=cmd_shotnoise)
    s = sub.add_parser("run", parents=[common], help="run an experiment specification")
    s.add_argument("spec")
    s.set_defaults(fn=cmd_run)
    s = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    s.add_argument("--full", action="store_true", help="full-size instance counts")
    s.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    from stabgeom.harness.spec import SpecError
    args = build_parser().parse_args(argv)
    if args.command != "run":
        args.format = args.format or "csv"
        args.seed = 0 if args.seed is None else args.seed
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_SPEC
    try:
        return args.fn(args)
    except SpecError as e:
        where = f" (field {e.field})" if e.field else ""
        print(f"spec error{where}: {e}", file=sys.stderr)
        return EXIT_SPEC
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SPEC
    except Exception as e:  # noqa: BLE001 - any other failure is a runtime failure
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
