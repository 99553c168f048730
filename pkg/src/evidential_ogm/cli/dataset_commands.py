"""Dataset generation commands."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer
from loguru import logger
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from evidential_ogm.cli.common import console, report_errors
from evidential_ogm.config import AnnotationLabelConfig, CoverageMode
from evidential_ogm.constants import DEFAULT_MIN_POINTS, Hypothesis
from evidential_ogm.evidence.mass import CHANNEL_INDEX
from evidential_ogm.io.base import atomic_write_bytes
from evidential_ogm.io.cloud import write_cloud
from evidential_ogm.io.ogm import write_ogm
from evidential_ogm.io.sample import load_annotated_sample
from evidential_ogm.labels.annotations import generate_label_from_annotations
from evidential_ogm.simulation.scene import Scene, example_scene_path
from evidential_ogm.simulation.synthetic import generate_synthetic_sample
from evidential_ogm.utils.hashing import canonical_hash, file_hash

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
THETA = CHANNEL_INDEX[Hypothesis.THETA]


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    )


def _simulate(scene: Scene, seed: np.random.SeedSequence, out: Path, index: int) -> list[Path]:
    rng = np.random.default_rng(seed)
    variant = scene.jittered(rng)
    cloud, label = generate_synthetic_sample(
        variant,
        variant.sparse_sensor,
        variant.dense_sensor,
        variant.grid,
        rng=rng,
    )
    stem = f"sample_{index:06d}"
    return [
        write_cloud(out / f"{stem}.epcl", cloud),
        write_ogm(out / f"{stem}.eogm", label),
    ]


def gen_synthetic(
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output directory"),
    ],
    scene_path: Annotated[
        Optional[Path],
        typer.Option("--scene", "-s", help="Scene JSON (default: bundled street scene)"),
    ] = None,
    samples: Annotated[
        int,
        typer.Option("--samples", "-n", min=1, help="Number of samples"),
    ] = 1,
    seed: Annotated[
        int,
        typer.Option("--seed", min=0, help="Root seed of all randomness"),
    ] = 0,
    jobs: Annotated[
        int,
        typer.Option("--jobs", "-j", min=1, help="Samples simulated in parallel"),
    ] = 1,
) -> None:
    """
    Simulate measurement clouds and evidential labels from a scene.

    Writes sample_NNNNNN.epcl / sample_NNNNNN.eogm pairs and a manifest with
    content hashes. Output depends only on the scene, --samples and --seed.
    """
    with report_errors():
        scene_path = scene_path or example_scene_path()
        scene = Scene.from_file(scene_path)
        seeds = np.random.SeedSequence(seed).spawn(samples)
        out.mkdir(parents=True, exist_ok=True)
        logger.info(f"simulating {samples} samples of {scene_path} with seed {seed}")

        with _progress() as progress, ThreadPoolExecutor(max_workers=jobs) as pool:
            task = progress.add_task("Simulating", total=samples)
            futures = [
                pool.submit(_simulate, scene, child, out, index)
                for index, child in enumerate(seeds)
            ]
            written: list[Path] = []
            for future in futures:
                written.extend(future.result())
                progress.advance(task)

        manifest = {
            "version": MANIFEST_VERSION,
            "scene": scene_path.name,
            "scene_hash": canonical_hash(scene.model_dump(mode="json")),
            "seed": seed,
            "samples": samples,
            "files": [{"name": path.name, "hash": file_hash(path)} for path in written],
        }
        atomic_write_bytes(
            out / MANIFEST_NAME,
            (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode(),
        )
    console.print(f"[green]✓[/green] {samples} samples written to {out}")


def gen_labels(
    samples_dir: Annotated[
        Path,
        typer.Option("--samples", help="Directory of annotated-sample JSON sidecars"),
    ],
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output directory"),
    ],
    min_points: Annotated[
        int,
        typer.Option("--min-points", min=0, help="Points a box needs to count as dynamic"),
    ] = DEFAULT_MIN_POINTS,
    coverage: Annotated[
        str,
        typer.Option("--coverage", help="Box rasterisation: 'center' or 'overlap'"),
    ] = "center",
) -> None:
    """
    Build evidential labels from annotated samples.

    Every *.json sidecar yields <stem>.eogm and a copy of its cloud as
    <stem>.epcl.
    """
    with report_errors():
        config = AnnotationLabelConfig(min_points=min_points, coverage=_coverage(coverage))
        sidecars = sorted(samples_dir.glob("*.json"))
        if not sidecars:
            msg = f"no *.json sample sidecars in {samples_dir}"
            raise FileNotFoundError(msg)
        out.mkdir(parents=True, exist_ok=True)

        table = Table(title="Annotation labels")
        table.add_column("Sample", style="cyan")
        table.add_column("Boxes", justify="right")
        table.add_column("Masked cells", justify="right")
        with _progress() as progress:
            task = progress.add_task("Labelling", total=len(sidecars))
            for sidecar in sidecars:
                sample, spec = load_annotated_sample(sidecar)
                label = generate_label_from_annotations(sample, spec, config)
                write_ogm(out / f"{sidecar.stem}.eogm", label)
                write_cloud(out / f"{sidecar.stem}.epcl", sample.cloud)
                masked = int(np.count_nonzero(label.masses[..., THETA] == 1.0))
                table.add_row(sidecar.stem, str(len(sample.boxes)), str(masked))
                progress.advance(task)
    console.print(table)


def _coverage(value: str) -> CoverageMode:
    if value not in ("center", "overlap"):
        raise typer.BadParameter(f"expected 'center' or 'overlap', got {value!r}")
    return value  # type: ignore[return-value]
