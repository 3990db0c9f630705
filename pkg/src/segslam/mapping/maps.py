"""Tracking map and long-term map.

Both maps store their landmarks column-wise (positions, descriptors,
provenance codes, instance classes, observation counts). Updates never
mutate a map; they return a new one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, TypeVar

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from ..exceptions import ValidationError
from ..geometry import CameraModel, Pose, back_project_array
from ..segmentation import MotionState
from ..tracking import ClassifiedPoints, FrameObservation
from .map_point import NO_CLASS, MapPoint, Provenance

logger = logging.getLogger(__name__)

DEFAULT_MERGE_RADIUS = 0.01
DEFAULT_DESCRIPTOR_LENGTH = 32

MapT = TypeVar("MapT", bound="LandmarkMap")


@dataclass(frozen=True, eq=False)
class LandmarkMap:
    """Column-wise landmark storage shared by both map kinds."""

    positions: NDArray[np.float64]
    descriptors: NDArray[np.uint8]
    provenance: NDArray[np.uint8]
    instance_classes: NDArray[np.int32]
    observation_counts: NDArray[np.uint32]

    def __post_init__(self) -> None:
        positions = np.array(self.positions, dtype=np.float64).reshape(-1, 3)
        n = positions.shape[0]
        descriptors = np.array(self.descriptors, dtype=np.uint8)
        if descriptors.ndim != 2:
            descriptors = descriptors.reshape(n, -1)
        provenance = np.array(self.provenance, dtype=np.uint8).reshape(-1)
        classes = np.array(self.instance_classes, dtype=np.int32).reshape(-1)
        counts = np.array(self.observation_counts, dtype=np.uint32).reshape(-1)
        if not (descriptors.shape[0] == provenance.size == classes.size == counts.size == n):
            raise ValidationError("map arrays differ in length")
        if not np.isfinite(positions).all():
            raise ValidationError("map positions must be finite")
        if n and counts.min() < 1:
            raise ValidationError("observation counts must be >= 1")
        for name, array in (
            ("positions", positions),
            ("descriptors", descriptors),
            ("provenance", provenance),
            ("instance_classes", classes),
            ("observation_counts", counts),
        ):
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def empty(cls: type[MapT], descriptor_length: int = DEFAULT_DESCRIPTOR_LENGTH) -> MapT:
        return cls(
            positions=np.empty((0, 3)),
            descriptors=np.empty((0, descriptor_length), dtype=np.uint8),
            provenance=np.empty(0, dtype=np.uint8),
            instance_classes=np.empty(0, dtype=np.int32),
            observation_counts=np.empty(0, dtype=np.uint32),
        )

    @classmethod
    def from_points(
        cls: type[MapT],
        points: Iterable[MapPoint],
        descriptor_length: int = DEFAULT_DESCRIPTOR_LENGTH,
    ) -> MapT:
        items = list(points)
        if not items:
            return cls.empty(descriptor_length)
        return cls(
            positions=np.array([p.position for p in items]),
            descriptors=np.array(
                [np.frombuffer(p.descriptor, dtype=np.uint8) for p in items]
            ),
            provenance=np.array([int(p.provenance) for p in items]),
            instance_classes=np.array(
                [NO_CLASS if p.instance_class is None else p.instance_class for p in items]
            ),
            observation_counts=np.array([p.observation_count for p in items]),
        )

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def __len__(self) -> int:
        return int(self.positions.shape[0])

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    @property
    def descriptor_length(self) -> int:
        return int(self.descriptors.shape[1])

    @property
    def points(self) -> tuple[MapPoint, ...]:
        return tuple(self.point(i) for i in range(len(self)))

    def point(self, index: int) -> MapPoint:
        provenance = Provenance(int(self.provenance[index]))
        cls_id = int(self.instance_classes[index])
        return MapPoint(
            position=self.positions[index],
            descriptor=self.descriptors[index].tobytes(),
            provenance=provenance,
            instance_class=None if provenance is Provenance.BACKGROUND else cls_id,
            observation_count=int(self.observation_counts[index]),
        )

    def count(self, provenance: Provenance) -> int:
        return int(np.count_nonzero(self.provenance == int(provenance)))

    def subset(self: MapT, selection: NDArray[np.bool_]) -> MapT:
        return replace(
            self,
            positions=self.positions[selection],
            descriptors=self.descriptors[selection],
            provenance=self.provenance[selection],
            instance_classes=self.instance_classes[selection],
            observation_counts=self.observation_counts[selection],
        )

    def min_pair_distance(self) -> float:
        """Smallest distance between two points (``inf`` below two points)."""

        if len(self) < 2:
            return float("inf")
        distances, _ = cKDTree(self.positions).query(self.positions, k=2)
        return float(distances[:, 1].min())

    def merged_with(
        self: MapT,
        positions: NDArray[np.float64],
        descriptors: NDArray[np.uint8],
        provenance: NDArray[np.uint8],
        instance_classes: NDArray[np.int32],
        merge_radius: float,
        *,
        count_hits: bool = True,
    ) -> MapT:
        """Insert candidate points, merging those within ``merge_radius``.

        A candidate closer than ``merge_radius`` to an existing point bumps
        that point's observation count (when ``count_hits``); candidates that
        crowd an earlier candidate are discarded.
        """

        positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
        if positions.shape[0] == 0:
            return self
        descriptors = np.asarray(descriptors, dtype=np.uint8).reshape(positions.shape[0], -1)

        counts = self.observation_counts.astype(np.uint32).copy()
        fresh = np.ones(positions.shape[0], dtype=bool)
        if len(self):
            distances, nearest = cKDTree(self.positions).query(
                positions, k=1, distance_upper_bound=merge_radius
            )
            hits = np.isfinite(distances) & (distances < merge_radius)
            if count_hits:
                np.add.at(counts, nearest[hits], 1)
            fresh = ~hits

        candidates = np.flatnonzero(fresh)
        keep = np.zeros(positions.shape[0], dtype=bool)
        if candidates.size:
            keep[candidates] = True
            tree = cKDTree(positions[candidates])
            for local, neighbours in enumerate(
                tree.query_ball_point(positions[candidates], merge_radius)
            ):
                if not keep[candidates[local]]:
                    continue
                for other in neighbours:
                    if other > local:
                        keep[candidates[other]] = False

        descriptor_base = self.descriptors
        if len(self) == 0 and descriptor_base.shape[1] != descriptors.shape[1]:
            descriptor_base = np.empty((0, descriptors.shape[1]), dtype=np.uint8)
        elif descriptor_base.shape[1] != descriptors.shape[1]:
            raise ValidationError(
                f"descriptor length {descriptors.shape[1]} does not match map "
                f"({descriptor_base.shape[1]})"
            )

        n_new = int(np.count_nonzero(keep))
        logger.debug(
            "Map merge: %d candidates, %d new, %d merged",
            positions.shape[0],
            n_new,
            positions.shape[0] - int(np.count_nonzero(fresh)),
        )
        return replace(
            self,
            positions=np.vstack([self.positions, positions[keep]]),
            descriptors=np.vstack([descriptor_base, descriptors[keep]]),
            provenance=np.concatenate([self.provenance, np.asarray(provenance)[keep]]),
            instance_classes=np.concatenate(
                [self.instance_classes, np.asarray(instance_classes)[keep]]
            ),
            observation_counts=np.concatenate(
                [counts, np.ones(n_new, dtype=np.uint32)]
            ),
        )


@dataclass(frozen=True, eq=False)
class TrackingMap(LandmarkMap):
    """Session map used for frame-to-map tracking, with its keyframe poses."""

    keyframe_poses: tuple[tuple[int, Pose], ...] = field(default=())

    def with_keyframe(self, frame_index: int, pose: Pose) -> TrackingMap:
        return replace(self, keyframe_poses=self.keyframe_poses + ((frame_index, pose),))


@dataclass(frozen=True, eq=False)
class LongTermMap(LandmarkMap):
    """Persistent map restricted to background points."""

    def __post_init__(self) -> None:
        super().__post_init__()
        self.check_purity()

    def check_purity(self) -> None:
        """Raise if any point is not background.

        Raises:
            ValidationError: If a static-instance point is present.
        """

        impure = int(np.count_nonzero(self.provenance != int(Provenance.BACKGROUND)))
        if impure:
            raise ValidationError(f"long-term map holds {impure} non-background points")


def update_tracking_map(
    tracking_map: TrackingMap,
    obs: FrameObservation,
    points: ClassifiedPoints,
    fine: Pose,
    cam: CameraModel,
    merge_radius: float = DEFAULT_MERGE_RADIUS,
) -> TrackingMap:
    """Insert a keyframe's background and static-instance features.

    Features are lifted with the fine pose (``P_world = fine^-1 * P_cam``).
    Features of moving instances are never inserted.
    """

    index_parts = [np.asarray(points.background, dtype=np.int64)]
    provenance_parts = [np.full(len(points.background), int(Provenance.BACKGROUND))]
    class_parts = [np.full(len(points.background), NO_CLASS)]
    for instance_id in points.instances_in(MotionState.STATIC):
        members = np.asarray(points.per_instance[instance_id], dtype=np.int64)
        index_parts.append(members)
        provenance_parts.append(np.full(members.size, int(Provenance.STATIC_INSTANCE)))
        class_parts.append(
            np.full(members.size, points.instance_classes.get(instance_id, NO_CLASS))
        )

    indices = np.concatenate(index_parts)
    provenance = np.concatenate(provenance_parts).astype(np.uint8)
    classes = np.concatenate(class_parts).astype(np.int32)
    with_depth = obs.raw_depth[indices] > 0
    indices, provenance, classes = (
        indices[with_depth],
        provenance[with_depth],
        classes[with_depth],
    )

    updated = tracking_map
    if indices.size:
        camera_points = back_project_array(cam, obs.pixels[indices], obs.raw_depth[indices])
        world_points = fine.inverse().apply(camera_points)
        updated = tracking_map.merged_with(
            world_points,
            obs.descriptors[indices],
            provenance,
            classes,
            merge_radius,
        )
    return updated.with_keyframe(obs.frame_index, fine)


def update_long_term_map(
    ltm: LongTermMap, tm: TrackingMap, merge_radius: float = DEFAULT_MERGE_RADIUS
) -> LongTermMap:
    """Copy background points of the tracking map not yet in the long-term map."""

    background = tm.provenance == int(Provenance.BACKGROUND)
    updated = ltm.merged_with(
        tm.positions[background],
        tm.descriptors[background],
        tm.provenance[background],
        tm.instance_classes[background],
        merge_radius,
        count_hits=False,
    )
    updated.check_purity()
    return updated
