"""Trajectory error, segmentation scores and report files."""

from .ate import AteReport, aggregate_ate, align_umeyama, ate, rigid_alignment
from .reports import ExperimentSummary, ReportWriter, RunRecord
from .segmentation_metrics import (
    ClassScore,
    SegReport,
    average_precision,
    class_iou,
    map50,
    miou,
    segmentation_report,
)
from .trajectory import (
    Trajectory,
    associate_trajectories,
    read_tum,
    trajectory_from_rows,
    write_tum,
)

__all__ = [
    "AteReport",
    "ClassScore",
    "ExperimentSummary",
    "ReportWriter",
    "RunRecord",
    "SegReport",
    "Trajectory",
    "aggregate_ate",
    "align_umeyama",
    "associate_trajectories",
    "ate",
    "average_precision",
    "class_iou",
    "map50",
    "miou",
    "read_tum",
    "rigid_alignment",
    "segmentation_report",
    "trajectory_from_rows",
    "write_tum",
]
