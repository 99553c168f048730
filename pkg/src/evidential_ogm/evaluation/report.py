"""Serialisation of evaluation results: JSON report, text table, Parquet counts."""

from __future__ import annotations

import json
from collections.abc import Iterable
from pathlib import Path
from typing import Any

import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq
from adaptix import Retort
from rich.table import Table

from evidential_ogm.constants import EVALUATED_LABELS
from evidential_ogm.evaluation.metrics import ConfusionCounts, EvalReport
from evidential_ogm.io.base import atomic_write_bytes

__all__ = [
    "counts_frame",
    "format_metric",
    "format_report_table",
    "report_rich_table",
    "report_to_dict",
    "write_counts_parquet",
    "write_report",
]

_retort = Retort()

_COLUMNS = ("state", "tp", "fp", "fn", "precision", "recall", "f1")


def format_metric(value: float | None) -> str:
    """Four decimals, or ``n/a`` for an undefined ratio."""
    return "n/a" if value is None else f"{value:.4f}"


def report_to_dict(report: EvalReport) -> dict[str, Any]:
    """Machine-readable form of a report; undefined ratios become null."""
    return _retort.dump(report)


def write_report(report: EvalReport, path: str | Path) -> Path:
    """Write the JSON report and the plain-text table next to it (``.txt``)."""
    path = Path(path)
    document = json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    atomic_write_bytes(path, document.encode())
    atomic_write_bytes(path.with_suffix(".txt"), format_report_table(report).encode())
    return path


def _rows(report: EvalReport) -> list[tuple[str, ...]]:
    return [
        (
            m.state.value,
            str(m.tp),
            str(m.fp),
            str(m.fn),
            format_metric(m.precision),
            format_metric(m.recall),
            format_metric(m.f1),
        )
        for m in report.metrics
    ]


def format_report_table(report: EvalReport) -> str:
    """
    One row per state: ``state tp fp fn precision recall f1``.

    The header line carries sample count, averaging and cell totals.
    """
    rows = [_COLUMNS, *_rows(report)]
    widths = [max(len(row[i]) for row in rows) for i in range(len(_COLUMNS))]
    lines = [
        f"# samples={report.sample_count} averaging={report.averaging} "
        f"evaluated_cells={report.evaluated_cells} masked_cells={report.masked_cells} "
        f"unknown_truth_cells={report.unknown_truth_cells}"
    ]
    lines += [
        "  ".join(cell.rjust(w) for cell, w in zip(row, widths, strict=True))
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def report_rich_table(report: EvalReport) -> Table:
    """The report as a :class:`rich.table.Table` for terminal output."""
    table = Table(
        title=f"{report.sample_count} samples, {report.averaging} average",
        show_header=True,
        header_style="bold cyan",
    )
    for column in _COLUMNS:
        table.add_column(column, justify="left" if column == "state" else "right")
    for row in _rows(report):
        table.add_row(*row)
    return table


def counts_frame(counts: Iterable[ConfusionCounts]) -> pd.DataFrame:
    """Per-sample counts, one row per (sample, state)."""
    records = [
        {
            "sample": c.sample,
            "state": label.value,
            "tp": c[label].tp,
            "fp": c[label].fp,
            "fn": c[label].fn,
            "evaluated_cells": c.evaluated_cells,
            "masked_cells": c.masked_cells,
            "unknown_truth_cells": c.unknown_truth_cells,
        }
        for c in counts
        for label in EVALUATED_LABELS
    ]
    columns = [
        "sample",
        "state",
        "tp",
        "fp",
        "fn",
        "evaluated_cells",
        "masked_cells",
        "unknown_truth_cells",
    ]
    return pd.DataFrame.from_records(records, columns=columns)


def write_counts_parquet(counts: Iterable[ConfusionCounts], path: str | Path) -> Path:
    """Per-sample counts as a zstd-compressed Parquet table."""
    table = pa.Table.from_pandas(counts_frame(counts), preserve_index=False)
    sink = pa.BufferOutputStream()
    pq.write_table(table, sink, compression="zstd")
    return atomic_write_bytes(path, sink.getvalue().to_pybytes())
