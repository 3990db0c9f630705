"""Ray casting against the room and box objects.

Every pixel casts the ray through its centre; the nearest surface hit gives
the dense depth and the instance label. Landmark visibility uses the same
slab test on the segment from the camera centre to the landmark.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import NDArray

from ..geometry import CameraModel, Pose

logger = logging.getLogger(__name__)

Box = tuple[NDArray[np.float64], NDArray[np.float64]]

HIT_EPSILON = 1e-9
OCCLUSION_MARGIN = 1e-6


def slab_intervals(
    origin: NDArray[np.float64],
    directions: NDArray[np.float64],
    lower: NDArray[np.float64],
    upper: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Entry and exit ray parameters of an axis-aligned box.

    A ray misses the box when ``t_near > t_far``.
    """

    d = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    o = np.asarray(origin, dtype=np.float64).reshape(1, 3)
    moving = np.abs(d) > 1e-15
    safe_d = np.where(moving, d, 1.0)
    t1 = (lower - o) / safe_d
    t2 = (upper - o) / safe_d
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    inside = (o >= lower) & (o <= upper)
    lo = np.where(moving, lo, np.where(inside, -np.inf, np.inf))
    hi = np.where(moving, hi, np.where(inside, np.inf, -np.inf))
    return lo.max(axis=1), hi.min(axis=1)


def box_entry(
    origin: NDArray[np.float64], directions: NDArray[np.float64], box: Box
) -> NDArray[np.float64]:
    """Ray parameter of the first hit on a box seen from outside, else ``inf``."""

    t_near, t_far = slab_intervals(origin, directions, box[0], box[1])
    hit = (t_near <= t_far) & (t_near > HIT_EPSILON)
    return np.where(hit, t_near, np.inf)


def pixel_rays(cam: CameraModel) -> NDArray[np.float64]:
    """Camera-frame ray through every pixel centre, scaled to unit depth."""

    v, u = np.mgrid[0 : cam.height, 0 : cam.width].astype(np.float64)
    x = (u * cam.image_scale - cam.cx) / cam.fx
    y = (v * cam.image_scale - cam.cy) / cam.fy
    return np.column_stack([x.ravel(), y.ravel(), np.ones(x.size)])


def render_frame(
    cam: CameraModel, pose: Pose, room: Box, boxes: list[Box]
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Dense depth in meters and label image (``k + 1`` for box ``k``)."""

    rays = pixel_rays(cam)
    origin = pose.center
    directions = rays @ pose.rotation
    _, room_exit = slab_intervals(origin, directions, room[0], room[1])
    depth = room_exit.copy()
    labels = np.zeros(depth.shape, dtype=np.int64)
    for k, box in enumerate(boxes):
        entry = box_entry(origin, directions, box)
        closer = entry < depth
        depth[closer] = entry[closer]
        labels[closer] = k + 1
    return depth.reshape(cam.shape), labels.reshape(cam.shape)


def occluded(
    origin: NDArray[np.float64], points: NDArray[np.float64], boxes: list[Box]
) -> NDArray[np.bool_]:
    """Whether a box surface lies strictly between the camera and each point."""

    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    blocked = np.zeros(points.shape[0], dtype=bool)
    if points.shape[0] == 0:
        return blocked
    segments = points - np.asarray(origin).reshape(1, 3)
    for box in boxes:
        t_near, t_far = slab_intervals(origin, segments, box[0], box[1])
        blocked |= (
            (t_near <= t_far)
            & (t_near > HIT_EPSILON)
            & (t_near < 1.0 - OCCLUSION_MARGIN)
        )
    return blocked
