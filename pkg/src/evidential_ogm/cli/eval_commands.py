"""Evaluation command."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated

import typer
from loguru import logger

from evidential_ogm.cli.common import console, report_errors
from evidential_ogm.config import EvaluationConfig
from evidential_ogm.constants import DEFAULT_MASK_LEVEL, DEFAULT_THRESHOLD
from evidential_ogm.evaluation.metrics import ConfusionCounts, aggregate, evaluate_pair
from evidential_ogm.evaluation.report import (
    report_rich_table,
    write_counts_parquet,
    write_report,
)
from evidential_ogm.io.ogm import read_ogm


def _pairs(pred_dir: Path, truth_dir: Path) -> list[tuple[Path, Path]]:
    truths = sorted(truth_dir.glob("*.eogm"))
    if not truths:
        msg = f"no *.eogm files in {truth_dir}"
        raise FileNotFoundError(msg)
    pairs = []
    for truth in truths:
        pred = pred_dir / truth.name
        if not pred.is_file():
            msg = f"no prediction {pred} for ground truth {truth}"
            raise FileNotFoundError(msg)
        pairs.append((pred, truth))
    extra = {p.name for p in pred_dir.glob("*.eogm")} - {t.name for t in truths}
    if extra:
        logger.warning(f"{len(extra)} predictions without ground truth ignored")
    return pairs


def evaluate(
    pred_dir: Annotated[
        Path,
        typer.Option("--pred", help="Directory of predicted EOGM files"),
    ],
    truth_dir: Annotated[
        Path,
        typer.Option("--truth", help="Directory of ground-truth EOGM files"),
    ],
    report_path: Annotated[
        Path,
        typer.Option(
            "--report", "-r", help="JSON report; .txt and .parquet are written beside it"
        ),
    ],
    threshold: Annotated[
        float,
        typer.Option("--threshold", "-t", help="Mass a label needs"),
    ] = DEFAULT_THRESHOLD,
    mask_level: Annotated[
        float,
        typer.Option("--mask", help="Truth cells with m(Θ) >= mask are not evaluated"),
    ] = DEFAULT_MASK_LEVEL,
    averaging: Annotated[
        str,
        typer.Option("--average", help="'micro' or 'macro' averaging over samples"),
    ] = "micro",
    jobs: Annotated[
        int,
        typer.Option("--jobs", "-j", min=1, help="Pairs evaluated in parallel"),
    ] = 1,
) -> None:
    """
    Per-state precision, recall and F1 of predictions against ground truth.

    Files are paired by name; every ground-truth file needs a prediction.
    """
    with report_errors():
        config = EvaluationConfig(threshold=threshold, mask_level=mask_level, averaging=averaging)
        pairs = _pairs(pred_dir, truth_dir)

        def score(pair: tuple[Path, Path]) -> ConfusionCounts:
            pred, truth = pair
            return evaluate_pair(
                read_ogm(pred),
                read_ogm(truth),
                config.threshold,
                config.mask_level,
                sample=truth.stem,
            )

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            counts = list(pool.map(score, pairs))
        report = aggregate(counts, config.averaging)
        write_report(report, report_path)
        write_counts_parquet(counts, report_path.with_suffix(".parquet"))
        logger.info(f"evaluated {len(counts)} pairs, report at {report_path}")
    console.print(report_rich_table(report))
