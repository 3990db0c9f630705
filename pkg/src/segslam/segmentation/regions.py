"""Instance mask data model.

A frame's segmentation is a set of non-overlapping instance regions; pixels
outside every region are background. On disk a frame is a label image whose
pixel value is ``instance_id + 1`` (0 for background).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import DimensionMismatch, EmptyRegion, ValidationError

logger = logging.getLogger(__name__)

MAX_INSTANCE_ID = 65534


class MotionState(str, Enum):
    """Motion verdict for an instance in the current frame."""

    STATIC = "static"
    MOVING = "moving"


@dataclass(frozen=True, eq=False)
class SegmentedRegion:
    """One instance mask with class, identity and motion attributes.

    Attributes:
        instance_id: Identifier unique within the frame.
        class_id: Index into the class table.
        mask: Boolean ``(height, width)`` membership grid.
        moveable: Whether the class is on the moveable shortlist.
        confidence: Detection confidence used for mAP ranking.
        motion_state: Motion verdict, ``None`` until judged.
    """

    instance_id: int
    class_id: int
    mask: NDArray[np.bool_]
    moveable: bool = False
    confidence: float = 1.0
    motion_state: MotionState | None = None

    def __post_init__(self) -> None:
        mask = np.array(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {mask.shape}")
        if not mask.any():
            raise EmptyRegion(f"region {self.instance_id} has an empty mask")
        if not 0 <= int(self.instance_id) <= MAX_INSTANCE_ID:
            raise ValidationError(f"instance_id {self.instance_id} out of range")
        if not 0.0 <= float(self.confidence) <= 1.0:
            raise ValidationError("confidence must lie in [0, 1]")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "instance_id", int(self.instance_id))
        object.__setattr__(self, "class_id", int(self.class_id))
        object.__setattr__(self, "moveable", bool(self.moveable))
        object.__setattr__(self, "confidence", float(self.confidence))

    @cached_property
    def area(self) -> int:
        """Number of pixels inside the region."""

        return int(np.count_nonzero(self.mask))

    @cached_property
    def barycenter(self) -> tuple[float, float]:
        """Mean pixel position ``(u, v)`` = (column, row)."""

        rows, cols = np.nonzero(self.mask)
        return float(cols.mean()), float(rows.mean())

    @property
    def bounding_box(self) -> tuple[int, int, int, int]:
        """Inclusive ``(u_min, v_min, u_max, v_max)``."""

        rows, cols = np.nonzero(self.mask)
        return int(cols.min()), int(rows.min()), int(cols.max()), int(rows.max())

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.mask.shape[0]), int(self.mask.shape[1]))

    def with_mask(self, mask: ArrayLike) -> SegmentedRegion:
        return replace(self, mask=np.asarray(mask, dtype=bool))

    def with_attributes(self, **changes: Any) -> SegmentedRegion:
        return replace(self, **changes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentedRegion):
            return NotImplemented
        return (
            self.instance_id == other.instance_id
            and self.class_id == other.class_id
            and self.moveable == other.moveable
            and self.confidence == other.confidence
            and self.motion_state == other.motion_state
            and self.mask.shape == other.mask.shape
            and bool(np.array_equal(self.mask, other.mask))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"SegmentedRegion(instance_id={self.instance_id}, class_id={self.class_id}, "
            f"area={self.area}, moveable={self.moveable}, "
            f"confidence={self.confidence}, motion_state={self.motion_state})"
        )


@dataclass(frozen=True)
class FrameSegmentation:
    """All instance regions of one frame."""

    frame_index: int
    regions: tuple[SegmentedRegion, ...]
    width: int
    height: int

    def __post_init__(self) -> None:
        regions = tuple(sorted(self.regions, key=lambda r: r.instance_id))
        object.__setattr__(self, "regions", regions)
        expected = (int(self.height), int(self.width))
        for region in regions:
            if region.shape != expected:
                raise DimensionMismatch(
                    f"region {region.instance_id} mask {region.shape} "
                    f"does not match frame {expected}"
                )
        ids = [r.instance_id for r in regions]
        if len(ids) != len(set(ids)):
            raise ValidationError(f"duplicate instance ids in frame {self.frame_index}")
        if len(regions) > 1:
            coverage = np.sum([r.mask for r in regions], axis=0)
            if np.any(coverage > 1):
                raise ValidationError(
                    f"regions overlap in frame {self.frame_index}"
                )

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def empty(cls, frame_index: int, width: int, height: int) -> FrameSegmentation:
        return cls(frame_index, (), width, height)

    @classmethod
    def from_label_image(
        cls,
        frame_index: int,
        labels: ArrayLike,
        classes: Mapping[int, int],
        *,
        confidence: float = 1.0,
        moveable: Mapping[int, bool] | None = None,
    ) -> FrameSegmentation:
        """Decode a label image (value = instance_id + 1).

        Raises:
            ValidationError: If a labelled instance has no class entry.
        """

        grid = np.asarray(labels)
        if grid.ndim != 2:
            raise DimensionMismatch(f"label image must be 2-D, got {grid.shape}")
        regions = []
        for value in np.unique(grid):
            if value == 0:
                continue
            instance_id = int(value) - 1
            if instance_id not in classes:
                raise ValidationError(
                    f"frame {frame_index}: instance {instance_id} has no class entry"
                )
            regions.append(
                SegmentedRegion(
                    instance_id=instance_id,
                    class_id=classes[instance_id],
                    mask=grid == value,
                    moveable=bool(moveable.get(instance_id, False)) if moveable else False,
                    confidence=confidence,
                )
            )
        return cls(frame_index, tuple(regions), int(grid.shape[1]), int(grid.shape[0]))

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def instance_ids(self) -> tuple[int, ...]:
        return tuple(r.instance_id for r in self.regions)

    @property
    def class_ids(self) -> frozenset[int]:
        return frozenset(r.class_id for r in self.regions)

    def __len__(self) -> int:
        return len(self.regions)

    def region(self, instance_id: int) -> SegmentedRegion:
        for region in self.regions:
            if region.instance_id == instance_id:
                return region
        raise KeyError(instance_id)

    def label_image(self) -> NDArray[np.uint16]:
        labels = np.zeros(self.shape, dtype=np.uint16)
        for region in self.regions:
            labels[region.mask] = region.instance_id + 1
        return labels

    def class_mask(self, class_id: int) -> NDArray[np.bool_]:
        mask = np.zeros(self.shape, dtype=bool)
        for region in self.regions:
            if region.class_id == class_id:
                mask |= region.mask
        return mask

    def with_regions(self, regions: Iterable[SegmentedRegion]) -> FrameSegmentation:
        return replace(self, regions=tuple(regions))

    def moveable_only(self) -> FrameSegmentation:
        return self.with_regions(r for r in self.regions if r.moveable)

    def with_confidence(self, confidence: float) -> FrameSegmentation:
        return self.with_regions(
            r.with_attributes(confidence=confidence) for r in self.regions
        )

    def with_motion_states(
        self, states: Mapping[int, MotionState]
    ) -> FrameSegmentation:
        return self.with_regions(
            r.with_attributes(motion_state=states.get(r.instance_id, r.motion_state))
            for r in self.regions
        )
