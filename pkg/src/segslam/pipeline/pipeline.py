"""The per-frame loop interleaving tracking, mask refinement and mapping.

For every frame after the first:

1. predict a pose from the last two poses and track it coarsely against the
   tracking map with every valid-depth feature;
2. fetch the coarse segmentation and, in ``full`` mode, refine it with the
   previous frame's refined masks warped by the coarse relative pose;
3. flag moveable regions, split features into background and per-instance
   sets and judge each instance Static or Moving;
4. track finely with background and static-instance features;
5. on keyframes, grow the tracking map with background features and those
   of instances judged Static over the last ``static_frames`` frames, then
   copy its background into the long-term map.

The first frame anchors the world frame at the identity pose.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd

from ..dataset import FrameDataset, load_dataset
from ..evaluation import Trajectory
from ..exceptions import ConfigurationError, Degenerate, SegSlamError
from ..geometry import Pose, relative_pose
from ..mapping import (
    LandmarkMap,
    LongTermMap,
    TrackingMap,
    load_map,
    relocalize,
    relocalize_estimate,
    update_long_term_map,
    update_tracking_map,
)
from ..segmentation import (
    ClassTable,
    FrameSegmentation,
    MotionState,
    refine,
    shortlist_moveable,
)
from ..tracking import (
    FrameObservation,
    TrackingConfig,
    classify_points,
    coarse_track,
    fine_track,
    judge_motion,
    predict_pose,
)
from .config import Mode, PipelineConfig
from .sources import CorruptedGroundTruthSource, MaskDirectorySource, SegmentationSource
from .timing import StageTimer

logger = logging.getLogger(__name__)

STATUS_ANCHOR = "anchor"
STATUS_TRACKED = "tracked"
STATUS_RELOCALIZED = "relocalized"
STATUS_LOST = "lost"

_NO_COUNTS = {"background": 0, "static_instance": 0, "moving": 0}


@dataclass(frozen=True)
class FrameRecord:
    """What happened to one frame."""

    frame_index: int
    timestamp: float
    status: str
    refined: bool
    counts: Mapping[str, int] = field(default_factory=lambda: dict(_NO_COUNTS))

    @property
    def tracked(self) -> bool:
        return self.status != STATUS_LOST


@dataclass(frozen=True, eq=False)
class PipelineResult:
    trajectory: Trajectory
    segmentations: tuple[FrameSegmentation, ...]
    coarse_segmentations: tuple[FrameSegmentation, ...]
    tracking_map: TrackingMap
    long_term_map: LongTermMap
    frames: tuple[FrameRecord, ...]
    timings: pd.DataFrame
    source_access_log: tuple[int, ...] = ()

    @property
    def lost_frames(self) -> tuple[int, ...]:
        return tuple(r.frame_index for r in self.frames if not r.tracked)

    def points_frame(self) -> pd.DataFrame:
        """Per-frame counts of background, static-instance and moving features."""

        return pd.DataFrame(
            [
                {"frame": r.frame_index, "status": r.status, **r.counts}
                for r in self.frames
            ],
            columns=["frame", "status", "background", "static_instance", "moving"],
        )


def static_streaks(
    streaks: Mapping[int, int], states: Mapping[int, MotionState]
) -> dict[int, int]:
    """Consecutive Static verdicts per instance, counting this frame.

    A Moving verdict resets the count; instances absent from ``states`` are
    forgotten.
    """

    return {
        iid: streaks.get(iid, 0) + 1 if state is MotionState.STATIC else 0
        for iid, state in states.items()
    }


class Pipeline:
    """Runs one configuration over one dataset."""

    def __init__(
        self,
        cfg: PipelineConfig,
        dataset: FrameDataset,
        *,
        source: SegmentationSource | None = None,
        reference_map: LandmarkMap | None = None,
    ) -> None:
        self.cfg = cfg
        self.dataset = dataset
        self.camera = dataset.camera
        self.tracking: TrackingConfig = cfg.effective_tracking(dataset.tracking_overrides)
        self.class_table = (
            ClassTable.from_csv(cfg.class_table) if cfg.class_table else dataset.class_table
        )
        if source is None:
            if cfg.mask_dir is not None:
                source = MaskDirectorySource(cfg.mask_dir, self.class_table)
            else:
                source = CorruptedGroundTruthSource(
                    dataset, cfg.corruption, seed=cfg.seed + cfg.corruption.seed
                )
        self.source = source

        if cfg.mode is Mode.SECOND_PASS and reference_map is None:
            if cfg.map_path is None:
                raise ConfigurationError("second_pass mode needs a map")
            reference_map = load_map(cfg.map_path)
        self.reference_map = reference_map
        self.timer = StageTimer()

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def run(self) -> PipelineResult:
        if len(self.dataset) == 0:
            raise ConfigurationError("dataset has no frames")
        if self.cfg.mode is Mode.SECOND_PASS:
            return self._run_against_map()
        return self._run_mapping()

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _coarse_segmentation(self, index: int) -> tuple[FrameSegmentation, FrameSegmentation]:
        coarse = self.source.segment(index)
        return coarse, shortlist_moveable(coarse, self.class_table)

    def _gating(self, seg: FrameSegmentation) -> FrameSegmentation:
        if self.cfg.mode is Mode.BASELINE:
            return FrameSegmentation.empty(seg.frame_index, seg.width, seg.height)
        return seg.moveable_only()

    def _run_mapping(self) -> PipelineResult:
        cfg, cam, tracking = self.cfg, self.camera, self.tracking
        merge_radius = cfg.mapping.merge_radius
        descriptor_length = self.dataset.descriptor_bytes

        stamps: list[float] = []
        poses: list[Pose] = []
        outputs: list[FrameSegmentation] = []
        coarse_outputs: list[FrameSegmentation] = []
        records: list[FrameRecord] = []

        # Frame 0: world anchor, segmentation taken as-is, every instance static.
        obs = self.dataset.observation(0)
        self.timer.start_frame(0)
        with self.timer.stage("total"):
            coarse_seg, seg = self._coarse_segmentation(0)
            points = classify_points(obs, self._gating(seg)).all_static()
            anchor = Pose.identity()
            tm = update_tracking_map(
                TrackingMap.empty(descriptor_length), obs, points, anchor, cam, merge_radius
            )
            ltm = update_long_term_map(LongTermMap.empty(descriptor_length), tm, merge_radius)
        stamps.append(obs.timestamp)
        poses.append(anchor)
        coarse_outputs.append(coarse_seg)
        outputs.append(seg.with_motion_states(points.motion_state))
        records.append(FrameRecord(0, obs.timestamp, STATUS_ANCHOR, False, points.counts()))

        prev_prev: Pose | None = None
        prev: Pose = anchor
        prev_seg: FrameSegmentation | None = outputs[-1]
        prev_depth = obs.depth_grid
        streaks: dict[int, int] = {}
        lost = False

        for index in range(1, len(self.dataset)):
            obs = self.dataset.observation(index)
            self.timer.start_frame(index)
            with self.timer.stage("total"):
                coarse_seg, seg = self._coarse_segmentation(index)
                coarse_outputs.append(coarse_seg)
                status = STATUS_RELOCALIZED if lost else STATUS_TRACKED
                try:
                    with self.timer.stage("coarse"):
                        coarse = self._coarse_pose(obs, tm, prev_prev, prev, lost)
                    refined = seg
                    if cfg.mode is Mode.FULL and prev_seg is not None and not lost:
                        with self.timer.stage("refine"):
                            refined = shortlist_moveable(
                                refine(
                                    prev_seg,
                                    prev_depth,
                                    seg,
                                    relative_pose(prev, coarse),
                                    cam,
                                    cfg.similarity,
                                ),
                                self.class_table,
                            )
                    with self.timer.stage("fine"):
                        points = judge_motion(
                            classify_points(obs, self._gating(refined)),
                            obs,
                            coarse,
                            tm,
                            cam,
                            tracking,
                        )
                        fine = fine_track(obs, points, tm, cam, coarse, tracking)
                        streaks = static_streaks(streaks, points.motion_state)
                        if index % cfg.mapping.keyframe_interval == 0:
                            unverified = [
                                iid
                                for iid in points.instances_in(MotionState.STATIC)
                                if streaks[iid] < cfg.mapping.static_frames
                            ]
                            tm = update_tracking_map(
                                tm,
                                obs,
                                points.without_instances(unverified),
                                fine,
                                cam,
                                merge_radius,
                            )
                            ltm = update_long_term_map(ltm, tm, merge_radius)
                except Degenerate as exc:
                    logger.warning("Frame %d lost: %s", index, exc)
                    outputs.append(seg)
                    records.append(FrameRecord(index, obs.timestamp, STATUS_LOST, False))
                    prev_seg = None
                    streaks = {}
                    lost = True
                    continue
                except SegSlamError as exc:
                    raise type(exc)(f"frame {index}: {exc}") from exc

            stamps.append(obs.timestamp)
            poses.append(fine)
            prev_seg = refined.with_motion_states(points.motion_state)
            outputs.append(prev_seg)
            records.append(
                FrameRecord(index, obs.timestamp, status, refined is not seg, points.counts())
            )
            prev_prev, prev = (None if lost else prev), fine
            prev_depth = obs.depth_grid
            lost = False
            logger.debug("Frame %d %s: %s", index, status, points.counts())

        return self._result(stamps, poses, outputs, coarse_outputs, tm, ltm, records)

    def _coarse_pose(
        self,
        obs: FrameObservation,
        tm: TrackingMap,
        prev_prev: Pose | None,
        prev: Pose,
        lost: bool,
    ) -> Pose:
        if lost:
            return relocalize(tm, obs, self.camera, self.tracking, extra_seeds=(prev,))
        guess = predict_pose(prev_prev, prev)
        return coarse_track(obs, tm, self.camera, guess, self.tracking).pose

    def _run_against_map(self) -> PipelineResult:
        """Track every frame against the fixed reference map by descriptor matching."""

        assert self.reference_map is not None
        reference = self.reference_map
        cam, tracking = self.camera, self.tracking
        stamps: list[float] = []
        poses: list[Pose] = []
        outputs: list[FrameSegmentation] = []
        records: list[FrameRecord] = []
        prev_prev: Pose | None = None
        prev: Pose | None = None

        for index in range(len(self.dataset)):
            obs = self.dataset.observation(index)
            self.timer.start_frame(index)
            with self.timer.stage("total"):
                _, seg = self._coarse_segmentation(index)
                outputs.append(seg)
                try:
                    with self.timer.stage("coarse"):
                        if prev is None:
                            pose = relocalize(reference, obs, cam, tracking)
                            status = STATUS_RELOCALIZED
                        else:
                            pose = relocalize_estimate(
                                reference,
                                obs,
                                cam,
                                tracking,
                                extra_seeds=(predict_pose(prev_prev, prev),),
                                use_yaw_seeds=False,
                            ).pose
                            status = STATUS_TRACKED
                except Degenerate as exc:
                    logger.warning("Frame %d lost against reference map: %s", index, exc)
                    records.append(FrameRecord(index, obs.timestamp, STATUS_LOST, False))
                    prev_prev = prev = None
                    continue
                except SegSlamError as exc:
                    raise type(exc)(f"frame {index}: {exc}") from exc
            stamps.append(obs.timestamp)
            poses.append(pose)
            records.append(FrameRecord(index, obs.timestamp, status, False))
            prev_prev, prev = prev, pose

        tm = reference if isinstance(reference, TrackingMap) else TrackingMap.empty(
            reference.descriptor_length
        )
        ltm = reference if isinstance(reference, LongTermMap) else LongTermMap.empty(
            reference.descriptor_length
        )
        return self._result(stamps, poses, outputs, outputs, tm, ltm, records)

    def _result(
        self,
        stamps: list[float],
        poses: list[Pose],
        outputs: list[FrameSegmentation],
        coarse_outputs: list[FrameSegmentation],
        tm: TrackingMap,
        ltm: LongTermMap,
        records: list[FrameRecord],
    ) -> PipelineResult:
        result = PipelineResult(
            trajectory=Trajectory(np.asarray(stamps), tuple(poses)),
            segmentations=tuple(outputs),
            coarse_segmentations=tuple(coarse_outputs),
            tracking_map=tm,
            long_term_map=ltm,
            frames=tuple(records),
            timings=self.timer.to_frame(),
            source_access_log=tuple(self.source.access_log),
        )
        logger.info(
            "%s run: %d frames, %d lost, tracking map %d points, long-term map %d points",
            self.cfg.mode.value,
            len(records),
            len(result.lost_frames),
            len(tm),
            len(ltm),
        )
        return result


def run_pipeline(
    cfg: PipelineConfig,
    dataset: FrameDataset | None = None,
    *,
    source: SegmentationSource | None = None,
    reference_map: LandmarkMap | None = None,
) -> PipelineResult:
    """Run the pipeline over ``dataset`` (or the directory ``cfg.dataset``).

    Raises:
        ConfigurationError: If neither a dataset nor a dataset path is given.
        SegSlamError: Module errors, re-raised with the frame index.
    """

    if dataset is None:
        if cfg.dataset is None:
            raise ConfigurationError("no dataset given")
        dataset = load_dataset(cfg.dataset)
    return Pipeline(cfg, dataset, source=source, reference_map=reference_map).run()
