"""Declarative Monte Carlo campaigns and their reports."""
from stabgeom.harness.report import CSV_COLUMNS, Report, Row, read_report_json, report_csv, report_json, write_report
from stabgeom.harness.runner import run_experiment
from stabgeom.harness.spec import EXPERIMENTS, ExperimentSpec, SpecError, emit_spec, parse_spec, spec_from_dict

__all__ = [
    "CSV_COLUMNS", "Report", "Row", "read_report_json", "report_csv", "report_json", "write_report",
    "run_experiment", "EXPERIMENTS", "ExperimentSpec", "SpecError", "emit_spec", "parse_spec", "spec_from_dict",
]
