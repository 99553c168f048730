"""pytest configuration for evidential_ogm tests."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from evidential_ogm.constants import MASS_CHANNELS, Hypothesis
from evidential_ogm.evidence.mass import CHANNEL_INDEX, BeliefMass
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.simulation.scene import (
    DynamicBox,
    GroundPatch,
    LidarConfig,
    Scene,
    SceneVariation,
)


@st.composite
def belief_masses(draw: st.DrawFn, min_theta: float = 0.5) -> BeliefMass:
    """Random valid masses; a floor on Θ keeps any two of them combinable."""
    raw = draw(
        st.lists(
            st.floats(0.0, 1.0, allow_nan=False),
            min_size=len(MASS_CHANNELS),
            max_size=len(MASS_CHANNELS),
        )
    )
    raw[CHANNEL_INDEX[Hypothesis.THETA]] += min_theta
    total = math.fsum(raw)
    values = [v / total for v in raw]
    values[-1] = 1.0 - math.fsum(values[:-1])
    return BeliefMass(tuple(max(v, 0.0) for v in values))  # type: ignore[arg-type]


def random_masses(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """``(*shape, 5)`` random masses summing to 1."""
    raw = rng.random((*shape, len(MASS_CHANNELS)))
    return raw / raw.sum(axis=-1, keepdims=True)


def square_patch(half: float) -> GroundPatch:
    """Drivable square of side ``2 * half`` centred on the origin."""
    return GroundPatch(vertices=[(-half, -half), (half, -half), (half, half), (-half, half)])


def one_hot_masses(codes: np.ndarray) -> np.ndarray:
    """Crisp masses from channel indices."""
    masses = np.zeros((*codes.shape, len(MASS_CHANNELS)))
    np.put_along_axis(masses, codes[..., None], 1.0, axis=-1)
    return masses


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_spec() -> GridSpec:
    """16 x 16 grid of 1 m cells centred on the ego origin."""
    return GridSpec(length_m=16.0, width_m=16.0, cell_size_m=1.0)


@pytest.fixture
def tiny_sensor() -> LidarConfig:
    """Coarse sensor looking down at the ground."""
    return LidarConfig(
        layers=6,
        azimuth_steps=72,
        vertical_fov=(math.radians(-60.0), math.radians(-10.0)),
        max_range=30.0,
    )


@pytest.fixture
def tiny_scene(tiny_sensor: LidarConfig) -> Scene:
    """Drivable square, one car and a 10 m grid with 0.5 m cells."""
    return Scene(
        patches=[square_patch(20.0)],
        dynamic_boxes=[
            DynamicBox(object_id=0, center=(3.0, 0.0, 0.75), size=(2.0, 1.5, 1.5)),
        ],
        sparse_sensor=tiny_sensor,
        dense_sensor=LidarConfig.dense_from(tiny_sensor, layers=60),
        grid=GridSpec(length_m=10.0, width_m=10.0, cell_size_m=0.5),
        variation=SceneVariation(dynamic_translation_std_m=0.2, dynamic_yaw_std_rad=0.05),
    )
