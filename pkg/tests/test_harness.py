import json

import pytest
from hypothesis import given, settings, strategies as st

from stabgeom.harness import (CSV_COLUMNS, Report, Row, SpecError, emit_spec, parse_spec, read_report_json,
                              report_csv, report_json, run_experiment, spec_from_dict, write_report)
from stabgeom.harness.cli import main
from stabgeom.harness.report import read_csv_rows
from stabgeom.harness.runner import ReplicaError, replica_values
from stabgeom.harness.verify import run_invariants


def _spec(**kw):
    return spec_from_dict(dict({"experiment": "mst_clt", "n": [10, 20], "replicas": 30, "seed": 1}, **kw))


# ------------------------------------------------------------------- specs

def test_minimal_spec_defaults():
    s = parse_spec('{"experiment": "mst_clt"}')
    assert s.alpha == 0.5
    assert s.replicas == 200
    assert s.dimension == 2
    assert s.n == (8, 12, 16, 24, 32)


def test_alpha_out_of_range_names_field():
    with pytest.raises(SpecError, match="inner scale exponent") as e:
        parse_spec('{"experiment": "psi_decay", "alpha": 1.5}')
    assert e.value.field == "alpha"


@pytest.mark.parametrize("doc", [
    '{"experiment": "mst_clt", "bogus": 1}',
    '{"experiment": "nope"}',
    '{"experiment": "mst_clt", "replicas": 10}',
    '{"experiment": "mst_clt", "n": [16, 8]}',
    '{"experiment": "mst_clt", "weight": {"kind": "power", "alpha": -1}}',
    '[1, 2]',
])
def test_bad_specs_rejected(doc):
    with pytest.raises(SpecError):
        parse_spec(doc)


def test_syntax_error_has_position():
    with pytest.raises(SpecError) as e:
        parse_spec('{"experiment":\n  "mst_clt",,}')
    assert e.value.line == 2


@given(st.sampled_from(["mst_clt", "onng_clt", "components_clt", "psi_decay", "radius_tails"]),
       st.floats(0.1, 0.9), st.integers(30, 500), st.integers(0, 2**40))
@settings(max_examples=40, deadline=None)
def test_emit_parse_round_trip(exp, alpha, reps, seed):
    s = spec_from_dict({"experiment": exp, "alpha": alpha, "replicas": reps, "seed": seed})
    again = parse_spec(emit_spec(s))
    assert again == s
    assert again.spec_hash == s.spec_hash


def test_hash_changes_with_content():
    assert _spec().spec_hash != _spec(seed=2).spec_hash


# ----------------------------------------------------------------- reports

def test_empty_report_is_header_only():
    r = Report({"experiment": "mst_clt"}, "0" * 64, 0, "0.1.0")
    assert report_csv(r) == ",".join(CSV_COLUMNS) + "\n"
    assert read_csv_rows(report_csv(r)) == []


def test_json_round_trip(tmp_path):
    r = Report({"experiment": "mst_clt"}, "ab" * 32, 3, "0.1.0",
               [Row("mst_clt", 8.0, 30, 1.5, 0.25, 0.001, 0.1, None, None, "x;y", {"d_k_se": 0.01})])
    assert Report.from_dict(json.loads(report_json(r))) == r
    (p, t) = write_report(r, tmp_path, "json")
    assert read_report_json(p) == r
    assert p.name.startswith("mst_clt-abababababab")
    assert t.name.endswith(".timings.json")


def test_csv_values_round_trip():
    row = Row("mst_clt", 8.0, 30, 0.1 + 0.2, 1 / 3, None, 1e-300, 2.5, None, "note")
    r = Report({"experiment": "mst_clt"}, "0" * 64, 0, "0.1.0", [row])
    back = read_csv_rows(report_csv(r))[0]
    assert back.mean == 0.1 + 0.2
    assert back.variance == 1 / 3
    assert back.var_per_volume is None
    assert back.d_k == 1e-300


def test_write_report_rejects_bad_format(tmp_path):
    with pytest.raises(ValueError):
        write_report(Report({}, "0" * 64, 0, "0"), tmp_path, "xml")


# ------------------------------------------------------------------ runner

def test_run_is_deterministic():
    a = run_experiment(_spec())
    b = run_experiment(_spec())
    assert len(a.rows) == 2
    assert report_csv(a) == report_csv(b)
    assert report_json(a) == report_json(b)


def test_threads_do_not_change_results():
    s = _spec(experiment="components_clt", replicas=40)
    assert report_csv(run_experiment(s, threads=1)) == report_csv(run_experiment(s, threads=3))


def test_degenerate_psi_is_zero():
    s = spec_from_dict({"experiment": "psi_decay", "n": [6, 8], "replicas": 30, "degenerate": True,
                        "functional": "component_count"})
    rep = run_experiment(s)
    assert all(r.psi_sup == 0.0 for r in rep.rows)
    assert all(m == 0.0 for r in rep.rows for m in r.extra["site_means"])


@pytest.mark.parametrize("exp,extra", [
    ("onng_clt", {}), ("shotnoise_clt", {"grid_spacing": 0.5}), ("mst_multivariate", {}),
    ("radius_tails", {"replicas": 120, "radius": "mst_attachment"}), ("two_arm_frequency", {"n": [10]}),
])
def test_every_experiment_runs(exp, extra):
    s = spec_from_dict(dict({"experiment": exp, "n": [6, 8], "replicas": 30, "seed": 4}, **extra))
    rep = run_experiment(s)
    assert rep.rows
    assert report_csv(rep).splitlines()[0] == ",".join(CSV_COLUMNS)


def test_replica_values_and_errors():
    s = _spec(replicas=30)
    v = replica_values(s, 10)
    assert len(v) == 30
    assert v == replica_values(s, 10, threads=2)
    with pytest.raises(ValueError):
        replica_values(spec_from_dict({"experiment": "psi_decay", "n": [8]}), 8)
    err = ReplicaError(__import__("stabgeom").point_process.SeedState(1, 7), RuntimeError("boom"))
    assert "stream=7" in str(err)


# --------------------------------------------------------------------- CLI

def test_cli_subcommands(tmp_path, capsys):
    assert main(["sample", "--n", "3", "--seed", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["dim"] == 2
    assert main(["mst", "--n", "3", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "mst.csv").read_text().startswith("i,j\n")
    assert main(["onng", "--n", "3", "--format", "json", "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "onng.json").read_text())["columns"] == ["i", "j"]
    assert main(["components", "--n", "3", "--r", "1.0"]) == 0
    dump = tmp_path / "field.csv"
    assert main(["shotnoise", "--n", "2", "--spacing", "0.5", "--dump-field", str(dump)]) == 0
    assert dump.read_text().startswith("x,y,value\n")


def test_cli_run_and_exit_codes(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"experiment": "components_clt", "n": [4, 6], "replicas": 30}))
    assert main(["run", str(spec), "--out-dir", str(tmp_path / "out")]) == 0
    written = json.loads(capsys.readouterr().out)["written"]
    assert any(p.endswith(".csv") for p in written)
    bad = tmp_path / "bad.json"
    bad.write_text('{"experiment": "psi_decay", "alpha": 1.5}')
    assert main(["run", str(bad)]) == 2
    assert "inner scale exponent" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    assert main(["mst", "--threads", "0"]) == 2
    with pytest.raises(SystemExit):
        main(["nope"])


def test_cli_seed_override(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"experiment": "components_clt", "n": [4, 6], "replicas": 30, "seed": 5}))
    main(["run", str(spec), "--out-dir", str(tmp_path / "a"), "--format", "json"])
    main(["run", str(spec), "--out-dir", str(tmp_path / "b"), "--format", "json", "--seed", "5"])
    a = sorted((tmp_path / "a").glob("*[0-9a-f].json"))
    b = sorted((tmp_path / "b").glob("*[0-9a-f].json"))
    assert a[0].read_bytes() == b[0].read_bytes()


def test_verify_quick():
    results = run_invariants(0, quick=True)
    assert all(ok for _, ok, _ in results), results
