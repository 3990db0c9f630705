"""Per-frame pipeline, its configuration and the experiment driver."""

from .config import DEFAULT_CONFIG_PATH, ExperimentConfig, Mode, PipelineConfig, SegSlamConfig
from .experiment import (
    COARSE_LABEL,
    RELOCALIZE_LONG_TERM,
    RELOCALIZE_TRACKING,
    ExperimentReport,
    RunOutcome,
    run_experiment,
    run_relocalization_experiment,
    summarize,
    write_experiment,
)
from .pipeline import (
    STATUS_ANCHOR,
    STATUS_LOST,
    STATUS_RELOCALIZED,
    STATUS_TRACKED,
    FrameRecord,
    Pipeline,
    PipelineResult,
    run_pipeline,
    static_streaks,
)
from .sources import (
    COARSE_CONFIDENCE,
    CorruptedGroundTruthSource,
    MaskDirectorySource,
    SegmentationSource,
)
from .timing import STAGES, StageTimer

__all__ = [
    "COARSE_CONFIDENCE",
    "COARSE_LABEL",
    "DEFAULT_CONFIG_PATH",
    "RELOCALIZE_LONG_TERM",
    "RELOCALIZE_TRACKING",
    "STAGES",
    "STATUS_ANCHOR",
    "STATUS_LOST",
    "STATUS_RELOCALIZED",
    "STATUS_TRACKED",
    "CorruptedGroundTruthSource",
    "ExperimentConfig",
    "ExperimentReport",
    "FrameRecord",
    "MaskDirectorySource",
    "Mode",
    "Pipeline",
    "PipelineConfig",
    "PipelineResult",
    "RunOutcome",
    "SegSlamConfig",
    "SegmentationSource",
    "StageTimer",
    "run_experiment",
    "run_pipeline",
    "run_relocalization_experiment",
    "static_streaks",
    "summarize",
    "write_experiment",
]
