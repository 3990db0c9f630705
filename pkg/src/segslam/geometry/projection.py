"""Back-projection of depth pixels and reprojection through a rigid transform.

With intrinsics ``fx, fy, cx, cy``, depth factor ``DF`` and image scale ``s``:

    Pz = D(u, v) / DF
    Px = (u - cx) * Pz / fx
    Py = (v - cy) * Pz / fy

and a camera point ``P`` moved by ``[R|T]`` lands on
``u' = (fx * X / Z + cx) / s``, ``v' = (fy * Y / Z + cy) / s`` with
``(X, Y, Z) = R P + T``.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import BehindCamera, ValidationError, ZeroDepth
from .camera import CameraModel
from .pose import Pose

logger = logging.getLogger(__name__)

Point3 = NDArray[np.float64]
Pixel = NDArray[np.float64]

MIN_DEPTH = 1e-9


def back_project(cam: CameraModel, px: ArrayLike, raw_depth: float) -> Point3:
    """Lift one pixel with a raw depth reading to a camera-frame point.

    Raises:
        ZeroDepth: If ``raw_depth`` is zero (no measurement).
        ValidationError: If the inputs are not finite or depth is negative.
    """

    pixel = np.asarray(px, dtype=np.float64).reshape(2)
    if not np.isfinite(pixel).all() or not np.isfinite(raw_depth):
        raise ValidationError("pixel and depth must be finite")
    if raw_depth == 0:
        raise ZeroDepth(f"no depth measurement at pixel ({pixel[0]}, {pixel[1]})")
    if raw_depth < 0:
        raise ValidationError(f"raw depth must be non-negative, got {raw_depth}")
    return back_project_array(cam, pixel[None, :], np.array([raw_depth]))[0]


def back_project_array(
    cam: CameraModel, uv: ArrayLike, raw_depth: ArrayLike
) -> NDArray[np.float64]:
    """Vectorised :func:`back_project` over ``N`` pixels.

    Raises:
        ZeroDepth: If any depth is zero; callers filter invalid pixels first.
    """

    pixels = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    depth = np.asarray(raw_depth, dtype=np.float64).reshape(-1)
    if pixels.shape[0] != depth.shape[0]:
        raise ValidationError("pixel and depth arrays differ in length")
    if np.any(depth <= 0):
        raise ZeroDepth("back-projection requested for pixels without depth")
    z = depth / cam.depth_factor
    x = (pixels[:, 0] - cam.cx) * z / cam.fx
    y = (pixels[:, 1] - cam.cy) * z / cam.fy
    return np.column_stack([x, y, z])


def project(cam: CameraModel, pose: Pose, p: ArrayLike) -> Pixel:
    """Transform ``p`` by ``pose`` and project it to a continuous pixel.

    Raises:
        BehindCamera: If the transformed depth is not positive.
    """

    point = np.asarray(p, dtype=np.float64).reshape(3)
    if not np.isfinite(point).all():
        raise ValidationError("point components must be finite")
    transformed = pose.apply(point)
    if transformed[2] <= 0:
        raise BehindCamera(f"transformed depth {transformed[2]:.6g} <= 0")
    return _pinhole(cam, transformed[None, :])[0]


def project_array(
    cam: CameraModel, pose: Pose, points: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Project ``N`` points, returning pixels and transformed depths.

    Pixels of points with depth ``<= MIN_DEPTH`` are NaN.
    """

    camera_points = pose.apply(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    z = camera_points[:, 2]
    uv = np.full((camera_points.shape[0], 2), np.nan)
    in_front = z > MIN_DEPTH
    if np.any(in_front):
        uv[in_front] = _pinhole(cam, camera_points[in_front])
    return uv, z


def _pinhole(cam: CameraModel, camera_points: NDArray[np.float64]) -> NDArray[np.float64]:
    x, y, z = camera_points[:, 0], camera_points[:, 1], camera_points[:, 2]
    u = (cam.fx * x + cam.cx * z) / (cam.image_scale * z)
    v = (cam.fy * y + cam.cy * z) / (cam.image_scale * z)
    return np.column_stack([u, v])
