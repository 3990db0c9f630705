"""Synthetic room-and-box scenes with ground-truth poses, features and masks."""

from .generator import (
    GroundTruthBundle,
    GroundTruthFrame,
    SceneGenerator,
    generate,
    second_pass,
)
from .render import occluded, pixel_rays, render_frame, slab_intervals
from .scene import (
    CameraSpec,
    LinearVelocity,
    ObjectSpec,
    RelocatedBetweenPasses,
    RoomSpec,
    SceneSpec,
    SecondPassSpec,
    StaticMotion,
    TrajectorySpec,
    dump_scene_spec,
    load_scene_spec,
)

__all__ = [
    "CameraSpec",
    "GroundTruthBundle",
    "GroundTruthFrame",
    "LinearVelocity",
    "ObjectSpec",
    "RelocatedBetweenPasses",
    "RoomSpec",
    "SceneGenerator",
    "SceneSpec",
    "SecondPassSpec",
    "StaticMotion",
    "TrajectorySpec",
    "dump_scene_spec",
    "generate",
    "load_scene_spec",
    "occluded",
    "pixel_rays",
    "render_frame",
    "second_pass",
    "slab_intervals",
]
