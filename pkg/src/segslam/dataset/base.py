"""Common interface of frame sequences fed to the pipeline."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Iterator, Mapping

import numpy as np
from numpy.typing import NDArray

from ..evaluation import Trajectory
from ..geometry import CameraModel
from ..segmentation import ClassTable, FrameSegmentation
from ..tracking import FrameObservation

logger = logging.getLogger(__name__)


class FrameDataset(ABC):
    """Abstract base class for an RGB-D feature sequence with ground truth."""

    def __init__(
        self,
        camera: CameraModel,
        class_table: ClassTable,
        *,
        tracking_overrides: Mapping[str, str] | None = None,
        descriptor_bytes: int = 32,
    ) -> None:
        self.camera = camera
        self.class_table = class_table
        self.tracking_overrides: Mapping[str, str] = dict(tracking_overrides or {})
        self.descriptor_bytes = descriptor_bytes

    # ------------------------------------------------------------------
    # Abstract surface
    # ------------------------------------------------------------------
    @abstractmethod
    def __len__(self) -> int:
        """Number of frames."""

    @abstractmethod
    def observation(self, index: int) -> FrameObservation:
        """Features and depth grid of one frame."""

    @abstractmethod
    def ground_truth_segmentation(self, index: int) -> FrameSegmentation | None:
        """Perfect instance masks of one frame, when the dataset has them."""

    @property
    @abstractmethod
    def groundtruth(self) -> Trajectory | None:
        """Ground-truth camera trajectory, when known."""

    # ------------------------------------------------------------------
    # Shared helpers
    # ------------------------------------------------------------------
    @property
    def timestamps(self) -> NDArray[np.float64]:
        return np.array([self.observation(i).timestamp for i in range(len(self))])

    def observations(self) -> Iterator[FrameObservation]:
        for index in range(len(self)):
            yield self.observation(index)

    def ground_truth_segmentations(self) -> list[FrameSegmentation] | None:
        segmentations = [self.ground_truth_segmentation(i) for i in range(len(self))]
        if any(seg is None for seg in segmentations):
            return None
        return [seg for seg in segmentations if seg is not None]
