"""Report files for runs and experiments.

Every metric file uses fixed float formatting, so identical results give
identical bytes. Timing lives in its own file and is excluded from that
guarantee.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import pandas as pd

from .ate import AteReport
from .segmentation_metrics import SegReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"


def _fmt(value: float) -> str:
    return FLOAT_FORMAT % value


@dataclass(frozen=True)
class RunRecord:
    """One pipeline run within an experiment."""

    label: str
    run: int
    seed: int
    ate_rmse: float
    lost_frames: int
    miou: float | None = None
    map50: float | None = None


@dataclass(frozen=True)
class ExperimentSummary:
    """Per-configuration aggregates plus the individual runs."""

    ate: Mapping[str, AteReport]
    segmentation: Mapping[str, SegReport]
    runs: tuple[RunRecord, ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys([*self.ate, *self.segmentation]))


class ReportWriter:
    """Write experiment summaries into an output directory."""

    REPORT_TEXT = "report.txt"
    REPORT_KV = "report.kv"
    RUNS_CSV = "runs.csv"
    PER_FRAME_CSV = "per_frame_errors.csv"
    TIMING_CSV = "timing.csv"
    POINTS_CSV = "points.csv"

    def __init__(self, output_dir: Path) -> None:
        self.output_dir = output_dir

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def write_summary(self, summary: ExperimentSummary) -> list[Path]:
        """Write the text, key=value, per-run and per-frame reports."""

        self.output_dir.mkdir(parents=True, exist_ok=True)
        paths = [
            self._write_text(summary),
            self._write_kv(summary),
            self._write_runs(summary.runs),
            self._write_per_frame(summary.ate),
        ]
        logger.info("Wrote reports to %s", self.output_dir)
        return paths

    def write_timing(self, timing: pd.DataFrame) -> Path:
        return self._write_frame(timing, self.TIMING_CSV, "%.3f")

    def write_points(self, points: pd.DataFrame) -> Path:
        return self._write_frame(points, self.POINTS_CSV, FLOAT_FORMAT)

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _write_frame(self, frame: pd.DataFrame, name: str, float_format: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / name
        frame.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
        return path

    def _write_text(self, summary: ExperimentSummary) -> Path:
        lines = []
        for label in summary.labels:
            lines.append(f"[{label}]")
            report = summary.ate.get(label)
            if report is not None:
                lines.append(f"  runs            {report.n_runs}")
                lines.append(f"  ATE RMSE (m)    {_fmt(report.rmse)}")
                lines.append(
                    f"  per-run median  {_fmt(report.median)}  "
                    f"min {_fmt(report.min)}  max {_fmt(report.max)}"
                )
            seg = summary.segmentation.get(label)
            if seg is not None:
                lines.append(f"  mIoU            {_fmt(seg.miou)}")
                lines.append(f"  mAP@0.5         {_fmt(seg.map50)}")
                for class_id, score in sorted(seg.per_class.items()):
                    lines.append(
                        f"    class {class_id:<3d} IoU {_fmt(score.iou)}  AP {_fmt(score.ap)}"
                    )
            lines.append("")
        path = self.output_dir / self.REPORT_TEXT
        path.write_text("\n".join(lines), encoding="utf-8")
        return path

    def _write_kv(self, summary: ExperimentSummary) -> Path:
        lines = []
        for label in summary.labels:
            report = summary.ate.get(label)
            if report is not None:
                lines.append(f"{label}.runs={report.n_runs}")
                for key in ("rmse", "median", "min", "max"):
                    lines.append(f"{label}.ate.{key}={_fmt(getattr(report, key))}")
            seg = summary.segmentation.get(label)
            if seg is not None:
                lines.append(f"{label}.miou={_fmt(seg.miou)}")
                lines.append(f"{label}.map50={_fmt(seg.map50)}")
        path = self.output_dir / self.REPORT_KV
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def _write_runs(self, runs: Sequence[RunRecord]) -> Path:
        frame = pd.DataFrame(
            [
                {
                    "label": r.label,
                    "run": r.run,
                    "seed": r.seed,
                    "ate_rmse": r.ate_rmse,
                    "lost_frames": r.lost_frames,
                    "miou": r.miou,
                    "map50": r.map50,
                }
                for r in runs
            ],
            columns=["label", "run", "seed", "ate_rmse", "lost_frames", "miou", "map50"],
        )
        return self._write_frame(frame, self.RUNS_CSV, FLOAT_FORMAT)

    def _write_per_frame(self, ate: Mapping[str, AteReport]) -> Path:
        rows = [
            {"label": label, "index": i, "error": error}
            for label, report in ate.items()
            for i, error in enumerate(report.per_frame_errors)
        ]
        frame = pd.DataFrame(rows, columns=["label", "index", "error"])
        return self._write_frame(frame, self.PER_FRAME_CSV, FLOAT_FORMAT)
