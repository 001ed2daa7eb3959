import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from viewplan.dubins import VehicleParams
from viewplan.geom import Polygon2, TriMesh
from viewplan.visibility import Environment, SensorParams, Target, build_visibility_mesh


@pytest.fixture(scope="session")
def vehicle() -> VehicleParams:
    return VehicleParams(40.0, -math.pi / 12.0, math.pi / 9.0)


@pytest.fixture(scope="session")
def unit_cube() -> TriMesh:
    """Closed unit cube [0,1]^3 with outward winding."""
    v = np.array([
        [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
        [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
    ], dtype=float)
    f = np.array([
        [0, 2, 1], [0, 3, 2],  # bottom (z=0), outward -z
        [4, 5, 6], [4, 6, 7],  # top (z=1), outward +z
        [0, 1, 5], [0, 5, 4],  # y=0
        [2, 3, 7], [2, 7, 6],  # y=1
        [1, 2, 6], [1, 6, 5],  # x=1
        [3, 0, 4], [3, 4, 7],  # x=0
    ])
    return TriMesh(v, f)


@pytest.fixture(scope="session")
def open_region() -> Polygon2:
    return Polygon2(np.array([[-1000.0, -1000.0], [1000.0, -1000.0],
                              [1000.0, 1000.0], [-1000.0, 1000.0]]))


@pytest.fixture(scope="session")
def dome_setup(open_region):
    """Unobstructed ground target: dome-shaped visibility volume."""
    env = Environment(open_region, [], 100.0, 380.0)
    sensor = SensorParams(d_max=400.0, h_view=50.0)
    target = Target((0.0, 0.0, 0.0), "ground")
    mesh = build_visibility_mesh(target, env, sensor)
    return env, sensor, target, mesh
