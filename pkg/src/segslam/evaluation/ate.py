"""Absolute trajectory error with rigid alignment.

Estimated camera centres are aligned to ground truth with the closed-form
SVD solution (rotation and translation, no scale) before residuals are
taken.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from ..exceptions import InsufficientOverlap
from ..geometry import Pose
from .trajectory import DEFAULT_MAX_DT, Trajectory, associate_trajectories

logger = logging.getLogger(__name__)

MIN_ALIGNMENT_PAIRS = 3


@dataclass(frozen=True)
class AteReport:
    """ATE of one run, or the summary of several runs.

    ``rmse`` is taken over every residual; ``median``, ``min`` and ``max``
    describe the per-run RMSE values (all equal to ``rmse`` for one run).
    """

    rmse: float
    median: float
    min: float
    max: float
    per_frame_errors: tuple[float, ...]
    run_rmses: tuple[float, ...]

    @property
    def n_runs(self) -> int:
        return len(self.run_rmses)


def _matched_centers(
    est: Trajectory, gt: Trajectory, max_dt: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    est_idx, gt_idx = associate_trajectories(est, gt, max_dt)
    if est_idx.size < MIN_ALIGNMENT_PAIRS:
        raise InsufficientOverlap(
            f"{est_idx.size} associated poses, need at least {MIN_ALIGNMENT_PAIRS}"
        )
    return est.centers[est_idx], gt.centers[gt_idx]


def rigid_alignment(
    source: NDArray[np.float64], target: NDArray[np.float64]
) -> Pose:
    """Rotation and translation minimising ``sum |R s + t - g|^2``."""

    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    covariance = (target - mu_t).T @ (source - mu_s) / source.shape[0]
    u, _, vt = np.linalg.svd(covariance)
    sign = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        sign[2, 2] = -1.0
    rotation = u @ sign @ vt
    return Pose(rotation, mu_t - rotation @ mu_s)


def align_umeyama(
    est: Trajectory, gt: Trajectory, max_dt: float = DEFAULT_MAX_DT
) -> Pose:
    """Rigid transform taking estimated camera centres onto ground truth.

    Raises:
        InsufficientOverlap: If fewer than three poses pair up in time.
    """

    source, target = _matched_centers(est, gt, max_dt)
    return rigid_alignment(source, target)


def _single_run(est: Trajectory, gt: Trajectory, max_dt: float) -> AteReport:
    source, target = _matched_centers(est, gt, max_dt)
    alignment = rigid_alignment(source, target)
    errors = np.linalg.norm(alignment.apply(source) - target, axis=1)
    rmse = float(np.sqrt(np.mean(errors**2)))
    return AteReport(
        rmse=rmse,
        median=rmse,
        min=rmse,
        max=rmse,
        per_frame_errors=tuple(float(e) for e in errors),
        run_rmses=(rmse,),
    )


def aggregate_ate(reports: Sequence[AteReport]) -> AteReport:
    """Pool per-run reports: RMSE over all residuals, median/min/max over runs."""

    if not reports:
        raise InsufficientOverlap("no runs to aggregate")
    errors = np.concatenate([np.asarray(r.per_frame_errors) for r in reports])
    run_rmses = np.array([rmse for r in reports for rmse in r.run_rmses])
    return AteReport(
        rmse=float(np.sqrt(np.mean(errors**2))) if errors.size else 0.0,
        median=float(np.median(run_rmses)),
        min=float(run_rmses.min()),
        max=float(run_rmses.max()),
        per_frame_errors=tuple(float(e) for e in errors),
        run_rmses=tuple(float(r) for r in run_rmses),
    )


def ate(
    est: Trajectory | Sequence[Trajectory],
    gt: Trajectory,
    max_dt: float = DEFAULT_MAX_DT,
) -> AteReport:
    """ATE of one estimated trajectory, or of several runs against one ground truth.

    Raises:
        InsufficientOverlap: If any run pairs fewer than three poses with ``gt``.
    """

    if isinstance(est, Trajectory):
        return _single_run(est, gt, max_dt)
    reports = [_single_run(run, gt, max_dt) for run in est]
    summary = aggregate_ate(reports)
    logger.info(
        "ATE over %d runs: median %.4f m, min %.4f m, max %.4f m",
        summary.n_runs,
        summary.median,
        summary.min,
        summary.max,
    )
    return summary
