"""
Root conftest for all tests.
Ensures proper Python path setup and provides small simulated scenes.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to Python path
src_path = Path(__file__).parent.parent / "src"
if str(src_path) not in sys.path:
    sys.path.insert(0, str(src_path))

from segslam.geometry import CameraModel, Pose  # noqa: E402
from segslam.simulator import SceneSpec, generate  # noqa: E402

SMALL_CAMERA = {
    "fx": 130.0,
    "fy": 130.0,
    "cx": 79.5,
    "cy": 59.5,
    "width": 160,
    "height": 120,
}

PERSON = 0
CHAIR = 56


def small_scene(**overrides) -> SceneSpec:
    """A 160x120 room scene with a person-sized box and a chair."""
    data = {
        "seed": 7,
        "n_frames": 12,
        "n_background_points": 400,
        "camera": SMALL_CAMERA,
        "objects": [
            {
                "class_id": PERSON,
                "center": [0.3, 0.3, 2.2],
                "extents": [0.5, 0.8, 0.5],
                "surface_point_count": 150,
            },
            {
                "class_id": CHAIR,
                "center": [-0.8, 0.5, 2.8],
                "extents": [0.5, 0.6, 0.5],
                "surface_point_count": 80,
            },
        ],
        "trajectory": {"kind": "arc", "sweep_deg": 6.0},
    }
    data.update(overrides)
    return SceneSpec.from_mapping(data)


@pytest.fixture
def camera() -> CameraModel:
    """Small pinhole camera shared by the unit tests."""
    return CameraModel(**SMALL_CAMERA)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def static_scene() -> SceneSpec:
    return small_scene()


@pytest.fixture(scope="session")
def static_bundle(static_scene):
    """Noise-free generated sequence of the static scene."""
    return generate(static_scene)


@pytest.fixture(scope="session")
def dynamic_scene() -> SceneSpec:
    """The person walks sideways at 0.3 m/s."""
    spec = small_scene()
    objects = [o.model_dump() for o in spec.objects]
    objects[0]["motion"] = {"kind": "linear_velocity", "velocity": [0.3, 0.0, 0.0]}
    return small_scene(objects=objects)


@pytest.fixture(scope="session")
def two_pass_scene() -> SceneSpec:
    """Both objects are somewhere else on the second visit."""
    spec = small_scene()
    objects = [o.model_dump() for o in spec.objects]
    objects[0]["motion"] = {"kind": "relocated", "new_center": [-0.6, 0.3, 3.2]}
    objects[1]["motion"] = {"kind": "relocated", "new_center": [0.9, 0.5, 3.0]}
    return small_scene(objects=objects)


def random_pose(rng: np.random.Generator, angle: float = 0.3, shift: float = 0.5) -> Pose:
    """Pose with a bounded rotation angle and translation."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    rotvec = axis * rng.uniform(0.0, angle)
    return Pose.from_rotvec(rotvec, rng.uniform(-shift, shift, size=3))


@pytest.fixture
def make_pose(rng):
    """Factory for random bounded poses."""
    return lambda angle=0.3, shift=0.5: random_pose(rng, angle, shift)


@pytest.fixture(scope="session")
def scene_factory():
    """Factory for variants of the small scene."""
    return small_scene
