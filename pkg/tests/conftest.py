"""Shared fixtures."""

import numpy as np
import pytest

from polymerge import MapElement, MergeConfig, VectorMap


@pytest.fixture
def config():
    """Default merge configuration."""
    return MergeConfig()


@pytest.fixture
def small_world_map():
    """A tiny world map with one element of each label."""
    return VectorMap(
        (
            MapElement("b1", "boundary", np.array([[0.0, 0.0], [10.0, 0.0]])),
            MapElement("d1", "divider", np.array([[0.0, 3.0], [10.0, 3.0]])),
            MapElement(
                "c1", "ped_crossing",
                np.array([[2.0, 5.0], [5.0, 5.0], [5.0, 7.0], [2.0, 7.0]]),
            ),
        ),
        "world",
    )
