"""Single-file grid commands: inference, rendering, export and inspection."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer
from rich.table import Table

from evidential_ogm.cli.common import console, report_errors
from evidential_ogm.config import IsmConfig
from evidential_ogm.constants import DEFAULT_CELL_SIZE_M, DEFAULT_THRESHOLD, CellLabel
from evidential_ogm.errors import BadMagicError, DomainError
from evidential_ogm.evidence.opinion import evidence_to_masses
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.io import get_registry
from evidential_ogm.io.cloud import read_cloud
from evidential_ogm.io.ogm import read_ogm, write_ogm
from evidential_ogm.io.pillars import (
    DEFAULT_MAX_PILLARS,
    DEFAULT_MAX_POINTS,
    pillarize,
    write_pillars,
)
from evidential_ogm.io.render import render_png
from evidential_ogm.ism.geometric import geometric_ism

_SPEC_DECIMALS = 6


def _grid_summary(grid: EvidentialGrid, title: str) -> Table:
    table = Table(title=title)
    table.add_column("Label", style="cyan")
    table.add_column("Cells", style="magenta", justify="right")
    for label in CellLabel:
        table.add_row(label.value, str(grid.count_label(label, DEFAULT_THRESHOLD)))
    return table


def ism(
    cloud_path: Annotated[
        Path,
        typer.Option("--cloud", "-c", help="EPCL point cloud"),
    ],
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output EOGM file"),
    ],
    config_path: Annotated[
        Optional[Path],
        typer.Option("--config", help="IsmConfig JSON (default parameters if omitted)"),
    ] = None,
) -> None:
    """Run the geometric inverse sensor model on one cloud."""
    with report_errors():
        cloud = read_cloud(cloud_path)
        config = (
            IsmConfig.model_validate_json(config_path.read_bytes())
            if config_path is not None
            else IsmConfig()
        )
        grid = geometric_ism(cloud, config, GridSpec())
        write_ogm(out, grid)
    console.print(_grid_summary(grid, f"{out.name} ({len(cloud)} points)"))


def render(
    ogm: Annotated[
        Path,
        typer.Option("--ogm", help="EOGM file"),
    ],
    png: Annotated[
        Path,
        typer.Option("--png", help="Output PNG file"),
    ],
) -> None:
    """Render a grid: red m(O_s), green m(F), blue m(O_d)."""
    with report_errors():
        render_png(read_ogm(ogm), png)
    console.print(f"[green]✓[/green] {png}")


def pillarize_cloud(
    cloud_path: Annotated[
        Path,
        typer.Option("--cloud", "-c", help="EPCL point cloud"),
    ],
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output EPIL file"),
    ],
    max_pillars: Annotated[
        int,
        typer.Option("--max-pillars", "-P", min=1, help="Pillar capacity"),
    ] = DEFAULT_MAX_PILLARS,
    max_points: Annotated[
        int,
        typer.Option("--max-points", "-N", min=1, help="Points per pillar"),
    ] = DEFAULT_MAX_POINTS,
) -> None:
    """Export pillar features of a cloud for an external trainer."""
    with report_errors():
        tensor = pillarize(read_cloud(cloud_path), GridSpec(), max_pillars, max_points)
        write_pillars(out, tensor)
    console.print(
        f"[green]✓[/green] {tensor.pillar_count} pillars, "
        f"{int(tensor.counts.sum())} points -> {out}"
    )


def convert_evidence(
    evidence_path: Annotated[
        Path,
        typer.Option("--evidence", "-e", help="NumPy .npy array of shape (rows, cols, 3)"),
    ],
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output EOGM file"),
    ],
    cell_size: Annotated[
        float,
        typer.Option("--cell-size", min=0.0, help="Cell edge in metres"),
    ] = DEFAULT_CELL_SIZE_M,
) -> None:
    """
    Convert network evidence (F, O_s, O_d) into an evidential grid.

    Each cell gets b_k = e_k / S and m(Θ) = 3 / S with S = 3 + sum(e).
    """
    with report_errors():
        try:
            evidence = np.load(evidence_path, allow_pickle=False)
        except ValueError as error:
            raise BadMagicError(f"not a NumPy array file: {error}", evidence_path) from error
        if evidence.ndim != 3:
            msg = f"evidence must be (rows, cols, 3), got {evidence.shape}"
            raise DomainError(msg)
        masses = evidence_to_masses(evidence)
        rows, cols = masses.shape[:2]
        spec = GridSpec(
            length_m=round(rows * cell_size, _SPEC_DECIMALS),
            width_m=round(cols * cell_size, _SPEC_DECIMALS),
            cell_size_m=cell_size,
        )
        grid = EvidentialGrid(spec, masses)
        write_ogm(out, grid)
    console.print(_grid_summary(grid, out.name))


def inspect_file(
    path: Annotated[
        Path,
        typer.Argument(help="EOGM, EPCL or EPIL file"),
    ],
) -> None:
    """Show the header of a binary file and whether it parses."""
    with report_errors():
        handler = get_registry().get_handler(path)
        if handler is None:
            msg = "not an EOGM, EPCL or EPIL file"
            raise BadMagicError(msg, path)
        metadata = handler.extract_metadata(path)
        valid = handler.validate(path)

    table = Table(title=path.name)
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="magenta")
    for key, value in metadata.items():
        table.add_row(key, str(value))
    table.add_row("valid", "[green]yes[/green]" if valid else "[red]no[/red]")
    console.print(table)
    if not valid:
        raise typer.Exit(code=4)
