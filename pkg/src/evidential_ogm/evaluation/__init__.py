"""Masked precision/recall evaluation of evidential grids."""

from evidential_ogm.evaluation.metrics import (
    ConfusionCounts,
    EvalReport,
    StateCounts,
    StateMetrics,
    aggregate,
    evaluate_pair,
)
from evidential_ogm.evaluation.report import (
    format_report_table,
    report_to_dict,
    write_counts_parquet,
    write_report,
)

__all__ = [
    "ConfusionCounts",
    "EvalReport",
    "StateCounts",
    "StateMetrics",
    "aggregate",
    "evaluate_pair",
    "format_report_table",
    "report_to_dict",
    "write_counts_parquet",
    "write_report",
]
