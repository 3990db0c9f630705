"""Robust pose estimation from 2D-3D correspondences.

Minimises the Huber-robustified reprojection error

    E(pose) = sum_i rho(|pi(pose * X_i) - x_i|)

with ``rho(r) = r^2 / 2`` for ``r <= delta`` and ``delta * (r - delta / 2)``
beyond. Each iteration solves the iteratively-reweighted Gauss-Newton normal
equations for a left perturbation ``(rho, omega)`` of the pose and accepts the
step only if the cost does not increase; otherwise the system is damped
Levenberg-Marquardt style and retried.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import Degenerate, ValidationError
from ..geometry import CameraModel, Pose
from ..geometry.projection import MIN_DEPTH
from .config import TrackingConfig

logger = logging.getLogger(__name__)

MIN_CORRESPONDENCES = 6
MAX_CONDITION_NUMBER = 1e14
MAX_DAMPING_ATTEMPTS = 10
BEHIND_CAMERA_RESIDUAL = 1e4


@dataclass(frozen=True, eq=False)
class CorrespondenceSet:
    """World points paired with the pixels where they were observed."""

    points: NDArray[np.float64]
    pixels: NDArray[np.float64]

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        pixels = np.array(self.pixels, dtype=np.float64).reshape(-1, 2)
        if points.shape[0] != pixels.shape[0]:
            raise ValidationError("point and pixel counts differ")
        if not (np.isfinite(points).all() and np.isfinite(pixels).all()):
            raise ValidationError("correspondences must be finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[ArrayLike, ArrayLike]]) -> CorrespondenceSet:
        if not pairs:
            return cls(np.empty((0, 3)), np.empty((0, 2)))
        points, pixels = zip(*pairs)
        return cls(np.asarray(points, float), np.asarray(pixels, float))

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class PoseEstimate:
    """Result of :func:`estimate_pose`.

    ``history`` holds the initial cost followed by the cost after every
    accepted iteration.
    """

    pose: Pose
    cost: float
    history: tuple[float, ...]
    iterations: int

    @property
    def initial_cost(self) -> float:
        return self.history[0]


def _as_correspondences(
    correspondences: CorrespondenceSet | Sequence[tuple[ArrayLike, ArrayLike]],
) -> CorrespondenceSet:
    if isinstance(correspondences, CorrespondenceSet):
        return correspondences
    return CorrespondenceSet.from_pairs(correspondences)


def huber(residual_norms: NDArray[np.float64], delta: float) -> NDArray[np.float64]:
    r = np.abs(residual_norms)
    return np.where(r <= delta, 0.5 * r**2, delta * (r - 0.5 * delta))


def _residuals(
    corr: CorrespondenceSet, cam: CameraModel, pose: Pose
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
    camera_points = pose.apply(corr.points)
    z = camera_points[:, 2]
    valid = z > MIN_DEPTH
    residuals = np.zeros((len(corr), 2))
    if np.any(valid):
        pc = camera_points[valid]
        u = (cam.fx * pc[:, 0] / pc[:, 2] + cam.cx) / cam.image_scale
        v = (cam.fy * pc[:, 1] / pc[:, 2] + cam.cy) / cam.image_scale
        residuals[valid] = np.column_stack([u, v]) - corr.pixels[valid]
    return residuals, camera_points, valid


def _cost_from(residuals: NDArray[np.float64], valid: NDArray[np.bool_], delta: float) -> float:
    norms = np.linalg.norm(residuals[valid], axis=1)
    penalty = float(np.count_nonzero(~valid)) * float(
        huber(np.array([BEHIND_CAMERA_RESIDUAL]), delta)[0]
    )
    return float(np.sum(huber(norms, delta))) + penalty


def reprojection_cost(
    correspondences: CorrespondenceSet | Sequence[tuple[ArrayLike, ArrayLike]],
    cam: CameraModel,
    pose: Pose,
    delta: float,
) -> float:
    """Huber reprojection cost of ``pose``.

    A point at or behind the camera contributes a constant penalty.
    """

    corr = _as_correspondences(correspondences)
    residuals, _, valid = _residuals(corr, cam, pose)
    return _cost_from(residuals, valid, delta)


def _jacobians(
    camera_points: NDArray[np.float64], cam: CameraModel
) -> NDArray[np.float64]:
    """Per-point 2x6 Jacobians of the projection w.r.t. ``(rho, omega)``."""

    x, y, z = camera_points[:, 0], camera_points[:, 1], camera_points[:, 2]
    n = camera_points.shape[0]
    s = cam.image_scale
    j_proj = np.zeros((n, 2, 3))
    j_proj[:, 0, 0] = cam.fx / (s * z)
    j_proj[:, 0, 2] = -cam.fx * x / (s * z**2)
    j_proj[:, 1, 1] = cam.fy / (s * z)
    j_proj[:, 1, 2] = -cam.fy * y / (s * z**2)

    # d(exp(omega) p + rho) = [I, -[p]x]
    j_point = np.zeros((n, 3, 6))
    j_point[:, 0, 0] = j_point[:, 1, 1] = j_point[:, 2, 2] = 1.0
    j_point[:, 0, 4], j_point[:, 0, 5] = z, -y
    j_point[:, 1, 3], j_point[:, 1, 5] = -z, x
    j_point[:, 2, 3], j_point[:, 2, 4] = y, -x
    return np.einsum("nij,njk->nik", j_proj, j_point)


def _normal_equations(
    corr: CorrespondenceSet, cam: CameraModel, pose: Pose, delta: float
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    residuals, camera_points, valid = _residuals(corr, cam, pose)
    r = residuals[valid]
    jac = _jacobians(camera_points[valid], cam)
    norms = np.linalg.norm(r, axis=1)
    weights = np.where(norms <= delta, 1.0, delta / np.maximum(norms, 1e-300))
    hessian = np.einsum("n,nji,njk->ik", weights, jac, jac)
    gradient = np.einsum("n,nji,nj->i", weights, jac, r)
    return hessian, gradient, int(np.count_nonzero(valid))


def cost_gradient(
    correspondences: CorrespondenceSet | Sequence[tuple[ArrayLike, ArrayLike]],
    cam: CameraModel,
    pose: Pose,
    delta: float,
) -> NDArray[np.float64]:
    """Analytic gradient of :func:`reprojection_cost` w.r.t. ``(rho, omega)``."""

    corr = _as_correspondences(correspondences)
    _, gradient, _ = _normal_equations(corr, cam, pose, delta)
    return gradient


def estimate_pose(
    correspondences: CorrespondenceSet | Sequence[tuple[ArrayLike, ArrayLike]],
    cam: CameraModel,
    initial: Pose,
    cfg: TrackingConfig | None = None,
) -> PoseEstimate:
    """Refine ``initial`` by minimising the robust reprojection error.

    Iterates until an accepted step lowers the cost by less than
    ``cfg.convergence_tol``, no step lowers it, or ``cfg.max_iterations``.

    Raises:
        Degenerate: With fewer than ``cfg.min_correspondences`` pairs or
            singular normal equations.
    """

    cfg = cfg or TrackingConfig()
    corr = _as_correspondences(correspondences)
    required = max(MIN_CORRESPONDENCES, cfg.min_correspondences)
    if len(corr) < required:
        raise Degenerate(f"{len(corr)} correspondences, at least {required} required")

    pose = initial
    cost = reprojection_cost(corr, cam, pose, cfg.huber_delta)
    history = [cost]
    iterations = 0

    for iterations in range(1, cfg.max_iterations + 1):
        hessian, gradient, n_valid = _normal_equations(corr, cam, pose, cfg.huber_delta)
        if n_valid < MIN_CORRESPONDENCES:
            raise Degenerate(f"only {n_valid} points in front of the camera")
        if not np.isfinite(hessian).all() or np.linalg.cond(hessian) > MAX_CONDITION_NUMBER:
            raise Degenerate("normal equations are singular")

        damping = 0.0
        accepted: tuple[Pose, float] | None = None
        for _ in range(MAX_DAMPING_ATTEMPTS):
            system = hessian + damping * np.diag(np.diag(hessian))
            try:
                step = -np.linalg.solve(system, gradient)
            except np.linalg.LinAlgError as exc:
                raise Degenerate("normal equations are singular") from exc
            candidate = pose.retract(step)
            candidate_cost = reprojection_cost(corr, cam, candidate, cfg.huber_delta)
            if candidate_cost <= cost:
                accepted = (candidate, candidate_cost)
                break
            damping = 1e-4 if damping == 0.0 else damping * 10.0

        if accepted is None:
            logger.debug("No cost-decreasing step after %d iterations", iterations)
            break

        decrease = cost - accepted[1]
        pose, cost = accepted
        history.append(cost)
        if decrease < cfg.convergence_tol:
            break

    return PoseEstimate(pose=pose, cost=cost, history=tuple(history), iterations=iterations)
