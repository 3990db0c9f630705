"""Pose recovery against a previously built map."""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from ..exceptions import Degenerate
from ..geometry import CameraModel, Pose, yaw_pose
from ..tracking import CorrespondenceSet, FrameObservation, PoseEstimate, TrackingConfig
from ..tracking.solver import estimate_pose
from .maps import LandmarkMap

logger = logging.getLogger(__name__)

YAW_SEEDS = 8


def descriptor_matches(
    landmark_map: LandmarkMap, obs: FrameObservation
) -> tuple[np.ndarray, np.ndarray]:
    """Pair features with map points carrying the identical descriptor.

    When several map points share a descriptor the most observed one wins,
    then the lowest index.
    """

    index: dict[bytes, int] = {}
    counts = landmark_map.observation_counts
    for i in range(len(landmark_map)):
        key = landmark_map.descriptors[i].tobytes()
        incumbent = index.get(key)
        if incumbent is None or counts[i] > counts[incumbent]:
            index[key] = i

    feature_indices: list[int] = []
    map_indices: list[int] = []
    for f in range(obs.n_features):
        hit = index.get(obs.descriptors[f].tobytes())
        if hit is not None:
            feature_indices.append(f)
            map_indices.append(hit)
    return np.asarray(feature_indices, dtype=np.int64), np.asarray(map_indices, dtype=np.int64)


def relocalize_estimate(
    landmark_map: LandmarkMap,
    obs: FrameObservation,
    cam: CameraModel,
    cfg: TrackingConfig,
    *,
    extra_seeds: Sequence[Pose] = (),
    use_yaw_seeds: bool = True,
) -> PoseEstimate:
    """Best pose estimate over the yaw seeds and any extra seeds.

    With ``use_yaw_seeds=False`` only ``extra_seeds`` are tried, which is how
    consecutive frames are tracked against a fixed map.

    Raises:
        Degenerate: If the map is empty, too few descriptors match, or no
            seed converges.
    """

    if landmark_map.is_empty:
        raise Degenerate("cannot relocalize against an empty map")
    feature_indices, map_indices = descriptor_matches(landmark_map, obs)
    if feature_indices.size < cfg.min_correspondences:
        raise Degenerate(
            f"frame {obs.frame_index}: {feature_indices.size} descriptor matches"
        )

    correspondences = CorrespondenceSet(
        landmark_map.positions[map_indices], obs.pixels[feature_indices]
    )
    seeds = (
        [yaw_pose(2.0 * math.pi * k / YAW_SEEDS) for k in range(YAW_SEEDS)]
        if use_yaw_seeds
        else []
    )
    seeds.extend(extra_seeds)
    if not seeds:
        raise Degenerate("no seed poses to start relocalization from")

    best: PoseEstimate | None = None
    for seed in seeds:
        try:
            estimate = estimate_pose(correspondences, cam, seed, cfg)
        except Degenerate as exc:
            logger.debug("Relocalization seed rejected: %s", exc)
            continue
        if best is None or estimate.cost < best.cost:
            best = estimate
    if best is None:
        raise Degenerate(f"frame {obs.frame_index}: no relocalization seed converged")
    logger.debug(
        "Frame %d relocalized from %d matches, cost %.6g",
        obs.frame_index,
        feature_indices.size,
        best.cost,
    )
    return best


def relocalize(
    landmark_map: LandmarkMap,
    obs: FrameObservation,
    cam: CameraModel,
    cfg: TrackingConfig,
    *,
    extra_seeds: Sequence[Pose] = (),
) -> Pose:
    """Recover the camera pose of ``obs`` from descriptor matches to a map."""

    return relocalize_estimate(landmark_map, obs, cam, cfg, extra_seeds=extra_seeds).pose
