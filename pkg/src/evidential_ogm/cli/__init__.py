"""Console script for evidential_ogm."""

from __future__ import annotations

from typing import Annotated

import typer

from evidential_ogm.cli.common import configure_logging, console

app = typer.Typer(
    name="evidential_ogm",
    help="Evidential occupancy grid labels: generation, inference, evaluation",
    no_args_is_help=True,
)


@app.callback()
def main(
    verbose: Annotated[
        bool,
        typer.Option("--verbose", "-v", help="Log debug messages to stderr"),
    ] = False,
) -> None:
    """Evidential occupancy grid mapping toolkit."""
    configure_logging(verbose)


# Import subcommands
from evidential_ogm.cli.dataset_commands import gen_labels, gen_synthetic  # noqa: E402
from evidential_ogm.cli.eval_commands import evaluate  # noqa: E402
from evidential_ogm.cli.grid_commands import (  # noqa: E402
    convert_evidence,
    inspect_file,
    ism,
    pillarize_cloud,
    render,
)

# Register subcommands
app.command(name="gen-synthetic")(gen_synthetic)
app.command(name="gen-labels")(gen_labels)
app.command(name="ism")(ism)
app.command(name="eval")(evaluate)
app.command(name="render")(render)
app.command(name="pillarize")(pillarize_cloud)
app.command(name="convert-evidence")(convert_evidence)
app.command(name="inspect")(inspect_file)

__all__ = ["app", "console"]


if __name__ == "__main__":
    app()
