"""Feature partition by segmentation and per-instance motion judgment."""

from __future__ import annotations

import logging

import numpy as np

from ..exceptions import DimensionMismatch
from ..geometry import CameraModel, Pose, back_project_array
from ..segmentation import FrameSegmentation, MotionState
from .association import LandmarkIndex, associate
from .config import TrackingConfig
from .observation import ClassifiedPoints, FrameObservation

logger = logging.getLogger(__name__)


def classify_points(obs: FrameObservation, seg: FrameSegmentation) -> ClassifiedPoints:
    """Split valid-depth features into background and per-instance sets.

    A feature belongs to instance ``i`` when its pixel cell lies in ``i``'s
    mask; features with zero depth are left out of every set.

    Raises:
        DimensionMismatch: If the segmentation and depth grid differ in size.
    """

    if seg.shape != obs.shape:
        raise DimensionMismatch(
            f"segmentation {seg.shape} does not match observation {obs.shape}"
        )

    valid = np.flatnonzero(obs.valid_depth)
    cols = np.floor(obs.pixels[valid, 0] + 0.5).astype(np.int64)
    rows = np.floor(obs.pixels[valid, 1] + 0.5).astype(np.int64)
    labels = seg.label_image()[rows, cols].astype(np.int64)

    per_instance = {
        region.instance_id: valid[labels == region.instance_id + 1]
        for region in seg.regions
    }
    return ClassifiedPoints(
        background=valid[labels == 0],
        per_instance=per_instance,
        motion_state={},
        instance_classes={r.instance_id: r.class_id for r in seg.regions},
    )


def judge_motion(
    points: ClassifiedPoints,
    obs: FrameObservation,
    coarse: Pose,
    landmarks: LandmarkIndex,
    cam: CameraModel,
    cfg: TrackingConfig,
) -> ClassifiedPoints:
    """Mark each instance Static or Moving by map-reprojection voting.

    Every instance feature is lifted to the world with the coarse pose and
    compared with its associated map point; a distance of ``match_dist_3d`` or
    more counts as moved. Features without an associated map point do not
    vote, and an instance without votes is Moving.
    """

    to_world = coarse.inverse()
    states: dict[int, MotionState] = {}
    for instance_id, indices in points.per_instance.items():
        if not indices:
            states[instance_id] = MotionState.MOVING
            continue
        matches = associate(obs, indices, landmarks, cam, coarse, cfg)
        if len(matches) == 0:
            logger.debug("Instance %d has no mapped features", instance_id)
            states[instance_id] = MotionState.MOVING
            continue

        camera_points = back_project_array(
            cam,
            obs.pixels[matches.feature_indices],
            obs.raw_depth[matches.feature_indices],
        )
        world_points = to_world.apply(camera_points)
        distances = np.linalg.norm(
            world_points - landmarks.positions[matches.map_indices], axis=1
        )
        moved_share = float(np.mean(distances >= cfg.match_dist_3d))
        states[instance_id] = (
            MotionState.MOVING if moved_share >= cfg.moving_fraction else MotionState.STATIC
        )
        logger.debug(
            "Instance %d: %d votes, %.2f moved -> %s",
            instance_id,
            len(matches),
            moved_share,
            states[instance_id].value,
        )
    return points.with_motion_states(states)
