"""Tests for synthetic sample generation."""

from __future__ import annotations

import math

import numpy as np
import pytest

from evidential_ogm.config import SyntheticLabelConfig
from evidential_ogm.constants import Hypothesis, Material
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import CHANNEL_INDEX
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.labels.geometry import footprint_mask
from evidential_ogm.simulation.raycast import NO_OBJECT, RayHits, cast_rays
from evidential_ogm.simulation.scene import (
    DynamicBox,
    LidarConfig,
    Scene,
)
from evidential_ogm.simulation.synthetic import (
    apply_dynamic_masses,
    count_hits,
    generate_synthetic_sample,
    hits_to_grid,
)

from .conftest import square_patch

_F = CHANNEL_INDEX[Hypothesis.F]
_OS = CHANNEL_INDEX[Hypothesis.O_S]
_OD = CHANNEL_INDEX[Hypothesis.O_D]
_THETA = CHANNEL_INDEX[Hypothesis.THETA]


def _hits(
    points: list[tuple[float, float, float]],
    material: Material = Material.DRIVABLE,
    object_id: int = NO_OBJECT,
) -> RayHits:
    n = len(points)
    return RayHits(
        points=np.array(points, dtype=np.float64).reshape(n, 3),
        ranges=np.ones(n),
        material=np.full(n, material, dtype=np.int8),
        object_id=np.full(n, object_id, dtype=np.int64),
        ring=np.zeros(n, dtype=np.int64),
        azimuth_index=np.arange(n, dtype=np.int64),
    )


@pytest.fixture
def four() -> GridSpec:
    """4 x 4 grid of 1 m cells."""
    return GridSpec(length_m=4.0, width_m=4.0, cell_size_m=1.0)


@pytest.fixture
def car_scene() -> Scene:
    """One dynamic box covering cells (1, 2) and (2, 2) of the 4 x 4 grid."""
    return Scene(
        dynamic_boxes=[DynamicBox(object_id=0, center=(0.0, 0.5, 0.5), size=(2.0, 0.5, 1.0))]
    )


def _prior(spec: GridSpec, cells: dict[tuple[int, int], tuple[float, float]]) -> EvidentialGrid:
    """Grid with ``(m(F), m(O_s))`` on the given cells and Θ elsewhere."""
    masses = np.zeros((*spec.shape, 5))
    masses[..., _THETA] = 1.0
    for cell, (free, static) in cells.items():
        masses[cell][_F] = free
        masses[cell][_OS] = static
        masses[cell][_THETA] = 1.0 - free - static
    return EvidentialGrid(spec, masses)


class TestHitsToGrid:
    """Mass accumulation from reflections."""

    def test_two_hits_in_one_cell(self, small_spec: GridSpec) -> None:
        """Two drivable returns in a cell give m(F) = 0.19."""
        hits = _hits([(0.1, 0.1, 0.0), (0.2, 0.7, 0.0)])
        grid = hits_to_grid(hits, small_spec, SyntheticLabelConfig(neighborhood_radius=0))
        assert grid.cell(8, 8)[Hypothesis.F] == pytest.approx(0.19, abs=1e-12)
        assert grid.cell(8, 8)[Hypothesis.THETA] == pytest.approx(0.81, abs=1e-12)
        assert grid.cell(8, 9).is_vacuous

    def test_neighbourhood_spreads_mass(self, small_spec: GridSpec) -> None:
        """With radius 1 a hit reaches its 3 x 3 block."""
        grid = hits_to_grid(_hits([(0.5, 0.5, 0.0)]), small_spec)
        block = grid.masses[7:10, 7:10, _F]
        np.testing.assert_allclose(block, 0.1)
        assert grid.cell(6, 8).is_vacuous

    def test_border_hits_are_clipped(self, small_spec: GridSpec) -> None:
        """Neighbours outside the grid are skipped and outside hits ignored."""
        free, static = count_hits(_hits([(-7.5, -7.5, 0.0), (100.0, 0.0, 0.0)]), small_spec, 1)
        assert free.sum() == 4
        assert static.sum() == 0

    def test_static_returns(self, small_spec: GridSpec) -> None:
        """Non-drivable returns build O_s evidence and conflict with F."""
        hits = _hits([(0.5, 0.5, 0.0)], material=Material.NON_DRIVABLE)
        both = RayHits(
            points=np.vstack([hits.points, hits.points]),
            ranges=np.ones(2),
            material=np.array([Material.NON_DRIVABLE, Material.DRIVABLE], dtype=np.int8),
            object_id=np.full(2, NO_OBJECT, dtype=np.int64),
            ring=np.zeros(2, dtype=np.int64),
            azimuth_index=np.arange(2, dtype=np.int64),
        )
        config = SyntheticLabelConfig(neighborhood_radius=0)
        static = hits_to_grid(hits, small_spec, config).cell(8, 8)
        assert static[Hypothesis.O_S] == pytest.approx(0.1)
        cell = hits_to_grid(both, small_spec, config).cell(8, 8)
        assert cell[Hypothesis.F] == pytest.approx(0.09 / 0.99)
        assert cell[Hypothesis.O_S] == pytest.approx(0.09 / 0.99)


class TestApplyDynamicMasses:
    """Static to dynamic rewrite under observed objects."""

    def test_footprint_gets_mean_static_mass(self, four: GridSpec, car_scene: Scene) -> None:
        """m(O_d) is the footprint average of the prior m(O_s)."""
        prior = _prior(four, {(1, 2): (0.0, 0.1), (2, 2): (0.0, 0.3)})
        hits = _hits([(0.0, 0.5, 0.5)] * 20, Material.DYNAMIC_OBJECT, object_id=0)
        label = apply_dynamic_masses(prior, car_scene, hits, four, min_beams=20)
        for cell in [(1, 2), (2, 2)]:
            assert label.masses[cell][_OD] == pytest.approx(0.2)
            assert label.masses[cell][_OS] == 0.0
            assert label.masses[cell][_THETA] == pytest.approx(0.8)
        assert label.masses[(1, 2)][_OD] + label.masses[(2, 2)][_OD] == pytest.approx(
            prior.masses[(1, 2)][_OS] + prior.masses[(2, 2)][_OS], abs=1e-9
        )
        assert label.cell(0, 0).is_vacuous

    def test_too_few_beams(self, four: GridSpec, car_scene: Scene) -> None:
        """Objects hit by fewer than min_beams rays keep their static evidence."""
        prior = _prior(four, {(1, 2): (0.0, 0.1), (2, 2): (0.0, 0.3)})
        hits = _hits([(0.0, 0.5, 0.5)] * 19, Material.DYNAMIC_OBJECT, object_id=0)
        assert apply_dynamic_masses(prior, car_scene, hits, four, min_beams=20) is prior

    def test_free_mass_is_capped(self, four: GridSpec, car_scene: Scene) -> None:
        """m(F) shrinks so the cell stays normalised."""
        prior = _prior(four, {(1, 2): (0.9, 0.1), (2, 2): (0.0, 0.7)})
        hits = _hits([(0.0, 0.5, 0.5)] * 20, Material.DYNAMIC_OBJECT, object_id=0)
        label = apply_dynamic_masses(prior, car_scene, hits, four, min_beams=20)
        assert label.masses[(1, 2)][_OD] == pytest.approx(0.4)
        assert label.masses[(1, 2)][_F] == pytest.approx(0.6)
        assert label.masses[(1, 2)][_THETA] == pytest.approx(0.0, abs=1e-12)

    def test_negative_min_beams(self, four: GridSpec, car_scene: Scene) -> None:
        """The beam threshold is a count."""
        with pytest.raises(DomainError):
            apply_dynamic_masses(
                EvidentialGrid.vacuous(four), car_scene, RayHits.empty(), four, -1
            )


class TestGenerateSyntheticSample:
    """End-to-end simulation."""

    def test_drivable_only_scene(self, tiny_scene: Scene) -> None:
        """Without objects nothing is occupied."""
        scene = tiny_scene.without_dynamic_boxes()
        cloud, label = generate_synthetic_sample(
            scene, scene.sparse_sensor, scene.dense_sensor, scene.grid
        )
        assert len(cloud) > 0
        assert not label.masses[..., _OS].any()
        assert not label.masses[..., _OD].any()
        assert label.masses[..., _F].max() > 0.5

    def test_car_becomes_dynamic(self, tiny_scene: Scene) -> None:
        """The car footprint carries dynamic and no static evidence."""
        _, label = generate_synthetic_sample(
            tiny_scene, tiny_scene.sparse_sensor, tiny_scene.dense_sensor, tiny_scene.grid
        )
        row, col = tiny_scene.grid.world_to_cell(3.0, 0.0)  # type: ignore[misc]
        assert label.masses[row, col, _OD] > 0.0
        assert label.masses[row, col, _OS] == 0.0

    def test_footprint_average_end_to_end(self, tiny_scene: Scene) -> None:
        """Footprint cells carry the mean prior m(O_s) as m(O_d), to 1e-9."""
        spec = tiny_scene.grid
        config = SyntheticLabelConfig()
        dense_hits = cast_rays(tiny_scene, tiny_scene.dense_sensor)
        prior = hits_to_grid(dense_hits, spec, config)
        footprint = footprint_mask(spec, tiny_scene.dynamic_boxes[0].bev())
        average = prior.masses[footprint, _OS].mean()
        assert dense_hits.hit_count(0) >= config.min_beams
        assert average > 0.0

        _, label = generate_synthetic_sample(
            tiny_scene, tiny_scene.sparse_sensor, tiny_scene.dense_sensor, spec, config
        )
        np.testing.assert_allclose(label.masses[footprint, _OD], average, rtol=0, atol=1e-9)
        np.testing.assert_allclose(
            label.masses[footprint, _F],
            np.minimum(prior.masses[footprint, _F], 1.0 - average),
            rtol=0,
            atol=1e-9,
        )
        assert not label.masses[footprint, _OS].any()
        np.testing.assert_array_equal(label.masses[~footprint], prior.masses[~footprint])

    def test_box_one_beam_short_stays_static(self, tiny_scene: Scene) -> None:
        """A box one hit below the beam threshold gets no dynamic mass."""
        spec = tiny_scene.grid
        beams = cast_rays(tiny_scene, tiny_scene.dense_sensor).hit_count(0)
        footprint = footprint_mask(spec, tiny_scene.dynamic_boxes[0].bev())

        def label_for(min_beams: int) -> EvidentialGrid:
            return generate_synthetic_sample(
                tiny_scene,
                tiny_scene.sparse_sensor,
                tiny_scene.dense_sensor,
                spec,
                SyntheticLabelConfig(min_beams=min_beams),
            )[1]

        assert label_for(beams).masses[footprint, _OD].all()
        short = label_for(beams + 1)
        assert not short.masses[..., _OD].any()
        assert short.masses[footprint, _OS].any()

    def test_sensors_must_share_geometry(self, tiny_scene: Scene) -> None:
        """Dense and sparse sensors must see the same field of view."""
        other = tiny_scene.dense_sensor.model_copy(update={"vertical_fov": (-1.0, 0.0)})
        with pytest.raises(DomainError, match="share"):
            generate_synthetic_sample(tiny_scene, tiny_scene.sparse_sensor, other, tiny_scene.grid)

    def test_reproducible(self, tiny_scene: Scene) -> None:
        """The same seed gives the same sample."""
        noisy = tiny_scene.sparse_sensor.model_copy(update={"dropout_probability": 0.1})
        runs = [
            generate_synthetic_sample(
                tiny_scene, noisy, tiny_scene.dense_sensor, tiny_scene.grid,
                rng=np.random.default_rng(5),
            )
            for _ in range(2)
        ]
        assert runs[0][0] == runs[1][0]
        assert runs[0][1] == runs[1][1]

    @pytest.mark.slow
    def test_uncertainty_grows_with_range(self) -> None:
        """Beyond the blind disc, mean m(Θ) per 5 m range bin never decreases."""
        sparse = LidarConfig()
        scene = Scene(
            patches=[square_patch(100.0)],
            sparse_sensor=sparse,
            dense_sensor=LidarConfig.dense_from(sparse, layers=1000),
        )
        _, label = generate_synthetic_sample(
            scene, scene.sparse_sensor, scene.dense_sensor, scene.grid
        )
        xs, ys = scene.grid.cell_centers()
        distance = np.hypot(*np.meshgrid(xs, ys, indexing="ij"))
        theta = label.masses[..., _THETA]
        assert not label.masses[..., _OD].any()

        blind = scene.dense_sensor.blind_radius_m
        assert np.all(theta[distance < blind - 1.0] == 1.0)

        bins = (distance // 5.0).astype(int)
        first = math.ceil(blind / 5.0)
        means = np.array([theta[bins == b].mean() for b in range(first, bins.max() + 1)])
        assert first == 1
        assert np.all(np.diff(means) >= 0.0)
        assert means[-1] > means[0]
