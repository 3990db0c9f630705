"""Coarse and fine frame-to-map tracking."""

from __future__ import annotations

import logging

import numpy as np

from ..geometry import CameraModel, Pose, compose, relative_pose
from .association import LandmarkIndex, associate
from .config import TrackingConfig
from .observation import ClassifiedPoints, FrameObservation
from .solver import CorrespondenceSet, PoseEstimate, estimate_pose

logger = logging.getLogger(__name__)


def predict_pose(prev_prev: Pose | None, prev: Pose) -> Pose:
    """Constant-velocity guess: repeat the last inter-frame motion."""

    if prev_prev is None:
        return prev
    return compose(relative_pose(prev_prev, prev), prev)


def track_features(
    obs: FrameObservation,
    feature_indices: np.ndarray,
    landmarks: LandmarkIndex,
    cam: CameraModel,
    guess: Pose,
    cfg: TrackingConfig,
) -> PoseEstimate:
    """Associate the given features with the map and solve for the pose.

    Raises:
        Degenerate: If too few features associate or the problem is singular.
    """

    matches = associate(obs, feature_indices, landmarks, cam, guess, cfg)
    correspondences = CorrespondenceSet(
        landmarks.positions[matches.map_indices], obs.pixels[matches.feature_indices]
    )
    logger.debug("Frame %d: %d correspondences", obs.frame_index, len(correspondences))
    return estimate_pose(correspondences, cam, guess, cfg)


def coarse_track(
    obs: FrameObservation,
    landmarks: LandmarkIndex,
    cam: CameraModel,
    guess: Pose,
    cfg: TrackingConfig,
) -> PoseEstimate:
    """Pose from every valid-depth feature, before any segmentation gating."""

    return track_features(obs, np.flatnonzero(obs.valid_depth), landmarks, cam, guess, cfg)


def fine_track(
    obs: FrameObservation,
    points: ClassifiedPoints,
    landmarks: LandmarkIndex,
    cam: CameraModel,
    coarse: Pose,
    cfg: TrackingConfig,
) -> Pose:
    """Pose from background features and features of static instances only.

    Raises:
        Degenerate: If the static features do not constrain the pose.
    """

    return fine_track_estimate(obs, points, landmarks, cam, coarse, cfg).pose


def fine_track_estimate(
    obs: FrameObservation,
    points: ClassifiedPoints,
    landmarks: LandmarkIndex,
    cam: CameraModel,
    coarse: Pose,
    cfg: TrackingConfig,
) -> PoseEstimate:
    return track_features(obs, points.static_indices(), landmarks, cam, coarse, cfg)
