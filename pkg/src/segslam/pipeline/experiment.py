"""Repeated seeded runs and the two-pass relocalization comparison.

Run ``r`` of an experiment uses pipeline seed ``cfg.seed + r``. On a
simulated scene the scene layout stays fixed while the sensor noise stream
is reseeded with ``noise_seed + r``, so noise-free runs repeat exactly.
Runs are independent and may go to a process pool; results are always
collected in run order so the report files do not depend on scheduling.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import pandas as pd

from ..dataset import BundleDataset, FrameDataset, load_dataset
from ..evaluation import (
    AteReport,
    ExperimentSummary,
    ReportWriter,
    RunRecord,
    SegReport,
    Trajectory,
    aggregate_ate,
    ate,
    segmentation_report,
)
from ..exceptions import ConfigurationError, InsufficientOverlap
from ..segmentation import FrameSegmentation
from ..simulator import SceneSpec, generate, second_pass
from .config import Mode, PipelineConfig
from .pipeline import PipelineResult, run_pipeline

logger = logging.getLogger(__name__)

COARSE_LABEL = "coarse"
RELOCALIZE_LONG_TERM = "relocalize_long_term"
RELOCALIZE_TRACKING = "relocalize_tracking"
DEFAULT_MODES = (Mode.FULL, Mode.TRACK_ONLY, Mode.BASELINE)


@dataclass(frozen=True, eq=False)
class RunOutcome:
    """Everything one run contributes to the experiment report."""

    run: int
    seed: int
    ate: Mapping[str, AteReport | None]
    lost_frames: Mapping[str, int]
    predictions: Mapping[str, tuple[FrameSegmentation, ...]]
    ground_truth: Mapping[str, tuple[FrameSegmentation, ...]]
    points: pd.DataFrame
    timings: pd.DataFrame


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    summary: ExperimentSummary
    outcomes: tuple[RunOutcome, ...] = ()
    written: tuple[Path, ...] = field(default_factory=tuple)

    @property
    def ate(self) -> Mapping[str, AteReport]:
        return self.summary.ate

    @property
    def segmentation(self) -> Mapping[str, SegReport]:
        return self.summary.segmentation


# ----------------------------------------------------------------------
# Public API
# ----------------------------------------------------------------------
def run_experiment(
    cfg: PipelineConfig,
    runs: int,
    *,
    scene: SceneSpec | None = None,
    modes: Sequence[Mode] = DEFAULT_MODES,
    relocalization: bool = False,
    output_dir: Path | None = None,
    workers: int | None = None,
) -> ExperimentReport:
    """Repeat the pipeline ``runs`` times for each mode and summarise.

    Without ``scene`` the runs read ``cfg.dataset`` and differ only in the
    corruption seed. With ``relocalization`` each run also performs the
    two-pass comparison (a simulated scene is required for that).

    Raises:
        ConfigurationError: If ``runs`` < 1, no data source is given, or
            second-pass mode is requested as an ordinary mode.
        SegSlamError: Module errors from any run.
    """

    if runs < 1:
        raise ConfigurationError("runs must be >= 1")
    if Mode.SECOND_PASS in modes:
        raise ConfigurationError("second_pass runs through the relocalization experiment")
    if scene is None and cfg.dataset is None:
        raise ConfigurationError("experiment needs a scene spec or a dataset")
    if relocalization and scene is None:
        raise ConfigurationError("the relocalization experiment needs a scene spec")
    if relocalization and scene is not None and not scene.has_relocated_objects:
        logger.warning("Scene has no relocated objects; both maps should score alike")

    workers = workers or cfg.workers
    jobs = [(cfg, scene, tuple(modes), relocalization, r) for r in range(runs)]
    logger.info(
        "Experiment: %d runs of %s%s on %d worker(s)",
        runs,
        [m.value for m in modes],
        " plus relocalization" if relocalization else "",
        workers,
    )
    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = tuple(executor.map(_run_job, jobs))
    else:
        outcomes = tuple(_run_job(job) for job in jobs)

    summary = summarize(outcomes)
    written: tuple[Path, ...] = ()
    if output_dir is not None:
        written = write_experiment(output_dir, summary, outcomes)
    return ExperimentReport(summary=summary, outcomes=outcomes, written=written)


def run_relocalization_experiment(
    cfg: PipelineConfig,
    runs: int,
    scene: SceneSpec,
    *,
    output_dir: Path | None = None,
    workers: int | None = None,
) -> ExperimentReport:
    """Second-pass ATE against the long-term map versus the full tracking map.

    Pass 1 runs in ``full`` mode to build both maps; pass 2 replays the scene
    with relocated objects and a shifted camera and tracks against each map
    without updating it.
    """

    return run_experiment(
        cfg,
        runs,
        scene=scene,
        modes=(Mode.FULL,),
        relocalization=True,
        output_dir=output_dir,
        workers=workers,
    )


def summarize(outcomes: Sequence[RunOutcome]) -> ExperimentSummary:
    """Aggregate run outcomes, in run order, into per-label reports.

    ATE pools runs that kept at least three aligned poses. Segmentation
    scores pool every frame of every run.
    """

    labels = list(dict.fromkeys(label for o in outcomes for label in o.lost_frames))
    ate_reports: dict[str, AteReport] = {}
    for label in labels:
        reports = [o.ate[label] for o in outcomes if o.ate.get(label) is not None]
        if reports:
            ate_reports[label] = aggregate_ate(reports)
        else:
            logger.error("No run of %s kept enough poses for ATE", label)

    seg_labels = list(dict.fromkeys(label for o in outcomes for label in o.predictions))
    seg_reports = {
        label: segmentation_report(
            [s for o in outcomes for s in o.predictions.get(label, ())],
            [s for o in outcomes if label in o.predictions for s in o.ground_truth[label]],
        )
        for label in seg_labels
    }

    records = []
    for o in outcomes:
        for label in labels:
            report = o.ate.get(label)
            records.append(
                RunRecord(
                    label=label,
                    run=o.run,
                    seed=o.seed,
                    ate_rmse=report.rmse if report is not None else math.nan,
                    lost_frames=o.lost_frames[label],
                    **_run_seg_scores(o, label),
                )
            )
    return ExperimentSummary(ate=ate_reports, segmentation=seg_reports, runs=tuple(records))


def write_experiment(
    output_dir: Path, summary: ExperimentSummary, outcomes: Sequence[RunOutcome]
) -> tuple[Path, ...]:
    writer = ReportWriter(output_dir)
    paths = writer.write_summary(summary)
    if outcomes:
        paths.append(writer.write_points(pd.concat([o.points for o in outcomes], ignore_index=True)))
        paths.append(writer.write_timing(pd.concat([o.timings for o in outcomes], ignore_index=True)))
    return tuple(paths)


# ----------------------------------------------------------------------
# Internal helpers
# ----------------------------------------------------------------------
def _run_job(job: tuple[PipelineConfig, SceneSpec | None, tuple[Mode, ...], bool, int]) -> RunOutcome:
    cfg, scene, modes, relocalization, run = job
    seed = cfg.seed + run
    if scene is not None:
        noise_seed = (scene.seed if scene.noise_seed is None else scene.noise_seed) + run
        scene = scene.model_copy(update={"noise_seed": noise_seed})
        dataset: FrameDataset = BundleDataset(generate(scene))
    else:
        assert cfg.dataset is not None
        dataset = load_dataset(cfg.dataset)

    gt_trajectory = dataset.groundtruth
    gt_segs = dataset.ground_truth_segmentations()
    collector = _Collector(run, seed)
    results: dict[Mode, PipelineResult] = {}
    for mode in modes:
        result = run_pipeline(cfg.model_copy(update={"mode": mode, "seed": seed}), dataset)
        result.long_term_map.check_purity()
        results[mode] = result
        collector.add(mode.value, result, gt_trajectory, gt_segs)
        if mode is modes[0] and gt_segs is not None:
            collector.add_segmentation(COARSE_LABEL, result.coarse_segmentations, gt_segs)

    if relocalization:
        assert scene is not None
        first = results.get(Mode.FULL)
        if first is None:
            first = run_pipeline(cfg.model_copy(update={"mode": Mode.FULL, "seed": seed}), dataset)
        replay = BundleDataset(second_pass(scene))
        replay_segs = replay.ground_truth_segmentations()
        reloc_cfg = cfg.model_copy(update={"mode": Mode.SECOND_PASS, "seed": seed})
        for label, reference in (
            (RELOCALIZE_LONG_TERM, first.long_term_map),
            (RELOCALIZE_TRACKING, first.tracking_map),
        ):
            result = run_pipeline(reloc_cfg, replay, reference_map=reference)
            collector.add(label, result, replay.groundtruth, replay_segs)
    return collector.outcome()


class _Collector:
    """Accumulates per-label results of one run."""

    def __init__(self, run: int, seed: int) -> None:
        self.run = run
        self.seed = seed
        self.ate: dict[str, AteReport | None] = {}
        self.lost: dict[str, int] = {}
        self.predictions: dict[str, tuple[FrameSegmentation, ...]] = {}
        self.ground_truth: dict[str, tuple[FrameSegmentation, ...]] = {}
        self.points: list[pd.DataFrame] = []
        self.timings: list[pd.DataFrame] = []

    def add(
        self,
        label: str,
        result: PipelineResult,
        gt_trajectory: Trajectory | None,
        gt_segs: Sequence[FrameSegmentation] | None,
    ) -> None:
        self.lost[label] = len(result.lost_frames)
        self.ate[label] = None
        if gt_trajectory is not None:
            try:
                self.ate[label] = ate(result.trajectory, gt_trajectory)
            except InsufficientOverlap as exc:
                logger.warning("Run %d %s: no ATE (%s)", self.run, label, exc)
        if gt_segs is not None:
            self.add_segmentation(label, result.segmentations, gt_segs)
        self.points.append(result.points_frame().assign(label=label, run=self.run))
        self.timings.append(result.timings.assign(label=label, run=self.run))

    def add_segmentation(
        self,
        label: str,
        predictions: Sequence[FrameSegmentation],
        gt_segs: Sequence[FrameSegmentation],
    ) -> None:
        self.predictions[label] = tuple(predictions)
        self.ground_truth[label] = tuple(gt_segs)

    def outcome(self) -> RunOutcome:
        return RunOutcome(
            run=self.run,
            seed=self.seed,
            ate=self.ate,
            lost_frames=self.lost,
            predictions=self.predictions,
            ground_truth=self.ground_truth,
            points=pd.concat(self.points, ignore_index=True) if self.points else pd.DataFrame(),
            timings=pd.concat(self.timings, ignore_index=True) if self.timings else pd.DataFrame(),
        )


def _run_seg_scores(outcome: RunOutcome, label: str) -> dict[str, float]:
    if label not in outcome.predictions:
        return {}
    report = segmentation_report(outcome.predictions[label], outcome.ground_truth[label])
    return {"miou": report.miou, "map50": report.map50}
