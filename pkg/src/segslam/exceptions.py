"""
Custom exceptions for segslam.

All exceptions inherit from SegSlamError for easy catching.
"""


class SegSlamError(Exception):
    """Base exception for segslam."""

    pass


class ConfigurationError(SegSlamError):
    """Configuration is missing or invalid."""

    pass


class ValidationError(SegSlamError, ValueError):
    """A value violates the invariants of its type."""

    pass


class DatasetError(SegSlamError):
    """Dataset directory is missing files or contains malformed data."""

    pass


class GeometryError(SegSlamError):
    """Error in camera geometry computations."""

    pass


class ZeroDepth(GeometryError):
    """Depth value is zero, meaning no measurement at that pixel."""

    pass


class BehindCamera(GeometryError):
    """Point lies at or behind the image plane after transformation."""

    pass


class SegmentationError(SegSlamError):
    """Error in segmentation processing."""

    pass


class EmptyRegion(SegmentationError):
    """Region mask contains no pixels."""

    pass


class EmptyProjection(SegmentationError):
    """No pixel of a region survived projection into the current frame."""

    pass


class DimensionMismatch(SegmentationError):
    """Masks, depth grids or frame sequences disagree in size."""

    pass


class UnknownClass(SegmentationError):
    """Class id is not present in the class table."""

    pass


class TrackingError(SegSlamError):
    """Error during pose tracking."""

    pass


class Degenerate(TrackingError):
    """Pose problem is under-constrained or its normal equations are singular."""

    pass


class MapFormatError(SegSlamError):
    """Serialized map file is malformed."""

    pass


class InvalidSpec(SegSlamError):
    """Scene specification rejected by the simulator."""

    pass


class InsufficientOverlap(SegSlamError):
    """Too few associated poses between two trajectories."""

    pass
