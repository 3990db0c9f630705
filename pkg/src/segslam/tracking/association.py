"""2D-3D association of frame features with map points.

Map points are projected with a pose guess; for every feature the projected
points within ``pixel_match_radius`` are candidates, and the candidate with
the smallest Hamming descriptor distance wins (ties go to the nearer pixel).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from ..geometry import CameraModel, Pose, project_array
from .config import TrackingConfig
from .observation import FrameObservation

logger = logging.getLogger(__name__)

MAX_CANDIDATES = 8


class LandmarkIndex(Protocol):
    """Read-only view of a map's landmark arrays."""

    @property
    def positions(self) -> NDArray[np.float64]: ...

    @property
    def descriptors(self) -> NDArray[np.uint8]: ...


@dataclass(frozen=True, eq=False)
class Association:
    """Matched ``(feature index, map index)`` pairs."""

    feature_indices: NDArray[np.int64]
    map_indices: NDArray[np.int64]
    descriptor_distances: NDArray[np.int64]

    @classmethod
    def empty(cls) -> Association:
        return cls(np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.int64))

    def __len__(self) -> int:
        return int(self.feature_indices.size)


def hamming_distances(descriptor: ArrayLike, others: ArrayLike) -> NDArray[np.int64]:
    """Bitwise Hamming distance from one descriptor to each row of ``others``."""

    a = np.asarray(descriptor, dtype=np.uint8)
    b = np.asarray(others, dtype=np.uint8)
    return np.unpackbits(np.bitwise_xor(b, a), axis=-1).sum(axis=-1).astype(np.int64)


def associate(
    obs: FrameObservation,
    feature_indices: ArrayLike,
    landmarks: LandmarkIndex,
    cam: CameraModel,
    pose: Pose,
    cfg: TrackingConfig,
) -> Association:
    """Match the selected features to map points seen from ``pose``."""

    features = np.asarray(feature_indices, dtype=np.int64).reshape(-1)
    positions = landmarks.positions
    if features.size == 0 or positions.shape[0] == 0:
        return Association.empty()
    if landmarks.descriptors.shape[1] != obs.descriptor_length:
        logger.warning(
            "Descriptor length mismatch: map %d, frame %d",
            landmarks.descriptors.shape[1],
            obs.descriptor_length,
        )
        return Association.empty()

    uv, _ = project_array(cam, pose, positions)
    visible = np.flatnonzero(cam.contains(uv))
    if visible.size == 0:
        return Association.empty()

    tree = cKDTree(uv[visible])
    k = min(MAX_CANDIDATES, visible.size)
    distances, neighbours = tree.query(
        obs.pixels[features],
        k=list(range(1, k + 1)),
        distance_upper_bound=cfg.pixel_match_radius,
    )

    matched_features: list[int] = []
    matched_points: list[int] = []
    matched_distances: list[int] = []
    for row, feature in enumerate(features):
        found = neighbours[row] < visible.size
        if not np.any(found):
            continue
        candidates = visible[neighbours[row][found]]
        pixel_distances = distances[row][found]
        hamming = hamming_distances(obs.descriptors[feature], landmarks.descriptors[candidates])
        best = np.lexsort((pixel_distances, hamming))[0]
        if hamming[best] > cfg.max_descriptor_distance:
            continue
        matched_features.append(int(feature))
        matched_points.append(int(candidates[best]))
        matched_distances.append(int(hamming[best]))

    return Association(
        np.asarray(matched_features, dtype=np.int64),
        np.asarray(matched_points, dtype=np.int64),
        np.asarray(matched_distances, dtype=np.int64),
    )
