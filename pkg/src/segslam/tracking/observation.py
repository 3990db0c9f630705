"""Per-frame feature observations and their classification into point sets."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import ValidationError
from ..segmentation import MotionState

logger = logging.getLogger(__name__)

NO_LANDMARK = -1


class Feature(NamedTuple):
    pixel: NDArray[np.float64]
    raw_depth: float
    descriptor: bytes
    landmark_hint: int | None


@dataclass(frozen=True, eq=False)
class FrameObservation:
    """Feature points of one frame aligned with its depth map.

    Features are stored column-wise: ``pixels[i]``, ``raw_depth[i]`` and
    ``descriptors[i]`` describe feature ``i``. ``landmark_ids`` carries the
    simulator's landmark id (``-1`` when unknown) and is only read by tests
    and diagnostics.
    """

    frame_index: int
    timestamp: float
    pixels: NDArray[np.float64]
    raw_depth: NDArray[np.float64]
    descriptors: NDArray[np.uint8]
    depth_grid: NDArray[np.uint16]
    landmark_ids: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        pixels = np.array(self.pixels, dtype=np.float64).reshape(-1, 2)
        raw_depth = np.array(self.raw_depth, dtype=np.float64).reshape(-1)
        descriptors = np.array(self.descriptors, dtype=np.uint8)
        if descriptors.ndim != 2:
            descriptors = descriptors.reshape(pixels.shape[0], -1)
        depth_grid = np.array(self.depth_grid, dtype=np.uint16)
        n = pixels.shape[0]
        if raw_depth.shape[0] != n or descriptors.shape[0] != n:
            raise ValidationError(
                f"frame {self.frame_index}: feature arrays differ in length"
            )
        if depth_grid.ndim != 2:
            raise ValidationError(f"frame {self.frame_index}: depth grid must be 2-D")
        if not np.isfinite(pixels).all() or not np.isfinite(raw_depth).all():
            raise ValidationError(f"frame {self.frame_index}: non-finite feature data")
        if np.any(raw_depth < 0):
            raise ValidationError(f"frame {self.frame_index}: negative raw depth")

        height, width = depth_grid.shape
        cols = np.floor(pixels[:, 0] + 0.5)
        rows = np.floor(pixels[:, 1] + 0.5)
        if np.any((cols < 0) | (cols >= width) | (rows < 0) | (rows >= height)):
            raise ValidationError(
                f"frame {self.frame_index}: feature pixel outside the image"
            )

        if self.landmark_ids is None:
            landmark_ids = np.full(n, NO_LANDMARK, dtype=np.int64)
        else:
            landmark_ids = np.array(self.landmark_ids, dtype=np.int64).reshape(-1)
            if landmark_ids.shape[0] != n:
                raise ValidationError(
                    f"frame {self.frame_index}: landmark id array length mismatch"
                )

        for name, array in (
            ("pixels", pixels),
            ("raw_depth", raw_depth),
            ("descriptors", descriptors),
            ("depth_grid", depth_grid),
            ("landmark_ids", landmark_ids),
        ):
            array.flags.writeable = False
            object.__setattr__(self, name, array)
        object.__setattr__(self, "frame_index", int(self.frame_index))
        object.__setattr__(self, "timestamp", float(self.timestamp))

    @property
    def n_features(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def descriptor_length(self) -> int:
        return int(self.descriptors.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.depth_grid.shape[0]), int(self.depth_grid.shape[1]))

    @property
    def valid_depth(self) -> NDArray[np.bool_]:
        return self.raw_depth > 0

    @property
    def features(self) -> Iterator[Feature]:
        for i in range(self.n_features):
            hint = int(self.landmark_ids[i])
            yield Feature(
                pixel=self.pixels[i],
                raw_depth=float(self.raw_depth[i]),
                descriptor=self.descriptors[i].tobytes(),
                landmark_hint=None if hint == NO_LANDMARK else hint,
            )


def _index_tuple(values: ArrayLike) -> tuple[int, ...]:
    return tuple(int(v) for v in np.asarray(values, dtype=np.int64).reshape(-1))


@dataclass(frozen=True)
class ClassifiedPoints:
    """Partition of a frame's features into background and instance sets.

    Attributes:
        background: Feature indices outside every moveable instance.
        per_instance: Instance id to the feature indices inside its mask.
        motion_state: Instance id to its motion verdict.
        instance_classes: Instance id to its class id.
    """

    background: tuple[int, ...]
    per_instance: Mapping[int, tuple[int, ...]] = field(default_factory=dict)
    motion_state: Mapping[int, MotionState] = field(default_factory=dict)
    instance_classes: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "background", _index_tuple(self.background))
        object.__setattr__(
            self,
            "per_instance",
            {int(k): _index_tuple(v) for k, v in sorted(self.per_instance.items())},
        )
        object.__setattr__(self, "motion_state", dict(self.motion_state))
        object.__setattr__(self, "instance_classes", dict(self.instance_classes))

    def with_motion_states(self, states: Mapping[int, MotionState]) -> ClassifiedPoints:
        merged = dict(self.motion_state)
        merged.update(states)
        return ClassifiedPoints(
            self.background, self.per_instance, merged, self.instance_classes
        )

    def without_instances(self, instance_ids: Iterable[int]) -> ClassifiedPoints:
        """Drop the given instances and their features from every set."""

        dropped = set(instance_ids)
        return ClassifiedPoints(
            self.background,
            {k: v for k, v in self.per_instance.items() if k not in dropped},
            {k: v for k, v in self.motion_state.items() if k not in dropped},
            {k: v for k, v in self.instance_classes.items() if k not in dropped},
        )

    def all_static(self) -> ClassifiedPoints:
        return self.with_motion_states(
            {iid: MotionState.STATIC for iid in self.per_instance}
        )

    def instances_in(self, state: MotionState) -> tuple[int, ...]:
        return tuple(
            iid for iid in self.per_instance if self.motion_state.get(iid) == state
        )

    def static_indices(self) -> NDArray[np.int64]:
        """Indices of background features plus features of static instances."""

        parts = [np.asarray(self.background, dtype=np.int64)]
        for iid in self.instances_in(MotionState.STATIC):
            parts.append(np.asarray(self.per_instance[iid], dtype=np.int64))
        return np.sort(np.concatenate(parts)) if parts else np.empty(0, np.int64)

    def moving_indices(self) -> NDArray[np.int64]:
        parts = [
            np.asarray(self.per_instance[iid], dtype=np.int64)
            for iid in self.instances_in(MotionState.MOVING)
        ]
        return np.sort(np.concatenate(parts)) if parts else np.empty(0, np.int64)

    def counts(self) -> dict[str, int]:
        """Feature counts per category: background, static instance, moving."""

        static_instances = sum(
            len(self.per_instance[iid]) for iid in self.instances_in(MotionState.STATIC)
        )
        return {
            "background": len(self.background),
            "static_instance": static_instances,
            "moving": int(self.moving_indices().size),
        }
