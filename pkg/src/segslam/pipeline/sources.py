"""Where coarse per-frame segmentations come from."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from pathlib import Path

from ..dataset import FrameDataset, read_mask_files
from ..exceptions import DatasetError
from ..segmentation import ClassTable, CorruptionConfig, FrameSegmentation, corrupt

logger = logging.getLogger(__name__)

COARSE_CONFIDENCE = 0.9


class SegmentationSource(ABC):
    """Abstract base class for coarse segmentation providers.

    Every request is appended to :attr:`access_log`, so callers can check
    that frames are requested in order and never ahead of time.
    """

    def __init__(self) -> None:
        self.access_log: list[int] = []

    def segment(self, frame_index: int) -> FrameSegmentation:
        self.access_log.append(frame_index)
        return self._segment(frame_index)

    @abstractmethod
    def _segment(self, frame_index: int) -> FrameSegmentation:
        """Produce the coarse segmentation of one frame."""


class CorruptedGroundTruthSource(SegmentationSource):
    """Ground-truth masks with regions dropped and dilated at random.

    Surviving regions are reported with confidence 0.9.
    """

    def __init__(self, dataset: FrameDataset, corruption: CorruptionConfig, seed: int) -> None:
        super().__init__()
        self.dataset = dataset
        self.corruption = corruption
        self.seed = seed

    def _segment(self, frame_index: int) -> FrameSegmentation:
        truth = self.dataset.ground_truth_segmentation(frame_index)
        if truth is None:
            raise DatasetError(f"frame {frame_index}: dataset has no ground-truth masks")
        coarse = corrupt(
            truth, self.corruption.drop_rate, self.corruption.dilate_rate, self.seed
        )
        return coarse.with_confidence(COARSE_CONFIDENCE)


class MaskDirectorySource(SegmentationSource):
    """Masks read from ``NNNNNN.pgm``/``NNNNNN.txt`` pairs in a directory."""

    def __init__(self, directory: Path, class_table: ClassTable) -> None:
        super().__init__()
        if not directory.is_dir():
            raise DatasetError(f"mask directory not found: {directory}")
        self.directory = directory
        self.class_table = class_table

    def _segment(self, frame_index: int) -> FrameSegmentation:
        return read_mask_files(self.directory, frame_index, self.class_table)
