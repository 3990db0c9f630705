"""Pinhole camera model, rigid transforms and the projection chain."""

from .camera import CameraModel
from .pose import Pose, compose, invert, relative_pose, yaw_pose
from .projection import (
    Pixel,
    Point3,
    back_project,
    back_project_array,
    project,
    project_array,
)

__all__ = [
    "CameraModel",
    "Pose",
    "Pixel",
    "Point3",
    "back_project",
    "back_project_array",
    "compose",
    "invert",
    "project",
    "project_array",
    "relative_pose",
    "yaw_pose",
]
