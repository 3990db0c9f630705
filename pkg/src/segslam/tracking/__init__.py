"""Coarse/fine pose tracking, point classification and motion judgment."""

from .association import Association, LandmarkIndex, associate, hamming_distances
from .classification import classify_points, judge_motion
from .config import TrackingConfig
from .observation import NO_LANDMARK, ClassifiedPoints, Feature, FrameObservation
from .solver import (
    CorrespondenceSet,
    PoseEstimate,
    cost_gradient,
    estimate_pose,
    huber,
    reprojection_cost,
)
from .tracker import (
    coarse_track,
    fine_track,
    fine_track_estimate,
    predict_pose,
    track_features,
)

__all__ = [
    "NO_LANDMARK",
    "Association",
    "ClassifiedPoints",
    "CorrespondenceSet",
    "Feature",
    "FrameObservation",
    "LandmarkIndex",
    "PoseEstimate",
    "TrackingConfig",
    "associate",
    "classify_points",
    "coarse_track",
    "cost_gradient",
    "estimate_pose",
    "fine_track",
    "fine_track_estimate",
    "hamming_distances",
    "huber",
    "judge_motion",
    "predict_pose",
    "reprojection_cost",
    "track_features",
]
