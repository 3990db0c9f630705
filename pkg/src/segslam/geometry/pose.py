"""Rigid transforms mapping world coordinates to camera coordinates.

A :class:`Pose` holds ``R`` and ``T`` with ``P_cam = R @ P_world + T``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

from ..exceptions import ValidationError

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-9
REORTHONORMALIZE_AFTER = 100


def _orthonormalize(rotation: NDArray[np.float64]) -> NDArray[np.float64]:
    u, _, vt = np.linalg.svd(rotation)
    fixed = u @ vt
    if np.linalg.det(fixed) < 0:
        u[:, -1] *= -1.0
        fixed = u @ vt
    return fixed


@dataclass(frozen=True, eq=False)
class Pose:
    """World-to-camera rigid transform.

    ``chain_length`` counts how many compositions produced this pose; once it
    exceeds ``REORTHONORMALIZE_AFTER`` the rotation is projected back onto
    SO(3) and the counter restarts.
    """

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]
    chain_length: int = 0

    def __post_init__(self) -> None:
        rotation = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.array(self.translation, dtype=np.float64).reshape(3)
        if not (np.isfinite(rotation).all() and np.isfinite(translation).all()):
            raise ValidationError("pose components must be finite")

        chain_length = int(self.chain_length)
        if chain_length > REORTHONORMALIZE_AFTER:
            rotation = _orthonormalize(rotation)
            chain_length = 0

        deviation = np.linalg.norm(rotation.T @ rotation - np.eye(3))
        if deviation > ORTHONORMALITY_TOLERANCE or np.linalg.det(rotation) <= 0:
            raise ValidationError(
                f"rotation is not a proper orthonormal matrix (|RtR - I| = {deviation:.3e})"
            )

        rotation.flags.writeable = False
        translation.flags.writeable = False
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)
        object.__setattr__(self, "chain_length", chain_length)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> Pose:
        """Build a pose from a 4x4 (or 3x4) homogeneous matrix."""

        m = np.asarray(matrix, dtype=np.float64)
        return cls(m[:3, :3], m[:3, 3])

    @classmethod
    def from_rotvec(cls, rotvec: ArrayLike, translation: ArrayLike) -> Pose:
        return cls(Rotation.from_rotvec(np.asarray(rotvec, float)).as_matrix(), translation)

    @classmethod
    def from_tum(cls, position: ArrayLike, quaternion_xyzw: ArrayLike) -> Pose:
        """Build a world-to-camera pose from a TUM camera-to-world row."""

        r_cw = Rotation.from_quat(np.asarray(quaternion_xyzw, dtype=np.float64))
        rotation = r_cw.as_matrix().T
        center = np.asarray(position, dtype=np.float64)
        rotation = _orthonormalize(rotation)
        return cls(rotation, -rotation @ center)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    @property
    def center(self) -> NDArray[np.float64]:
        """Camera centre expressed in world coordinates."""

        return -self.rotation.T @ self.translation

    def as_matrix(self) -> NDArray[np.float64]:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def to_tum(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Return camera-to-world ``(position, quaternion_xyzw)``."""

        quat = Rotation.from_matrix(self.rotation.T).as_quat()
        return self.center, quat

    def apply(self, points: ArrayLike) -> NDArray[np.float64]:
        """Transform points of shape ``(3,)`` or ``(N, 3)``."""

        p = np.asarray(points, dtype=np.float64)
        if p.ndim == 1:
            return self.rotation @ p + self.translation
        return p @ self.rotation.T + self.translation

    def compose(self, other: Pose) -> Pose:
        """Return ``self o other`` (``other`` applied first)."""

        return compose(self, other)

    def inverse(self) -> Pose:
        return invert(self)

    def retract(self, delta: ArrayLike) -> Pose:
        """Apply a left-multiplicative update ``delta = (rho, omega)``.

        The perturbed pose maps a camera point ``p`` to ``exp(omega) p + rho``.
        """

        d = np.asarray(delta, dtype=np.float64).reshape(6)
        update = Rotation.from_rotvec(d[3:]).as_matrix()
        return Pose(
            update @ self.rotation,
            update @ self.translation + d[:3],
            chain_length=self.chain_length + 1,
        )

    def allclose(self, other: Pose, atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0.0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0.0, atol=atol)
        )

    def rotation_angle_to(self, other: Pose) -> float:
        """Geodesic angle in radians between the two rotations."""

        relative = self.rotation.T @ other.rotation
        return float(Rotation.from_matrix(_orthonormalize(relative)).magnitude())

    def __repr__(self) -> str:
        rotvec = Rotation.from_matrix(self.rotation).as_rotvec()
        return (
            f"Pose(rotvec={np.array2string(rotvec, precision=6)}, "
            f"translation={np.array2string(self.translation, precision=6)})"
        )


def compose(a: Pose, b: Pose) -> Pose:
    """Return the pose applying ``b`` first, then ``a``."""

    return Pose(
        a.rotation @ b.rotation,
        a.rotation @ b.translation + a.translation,
        chain_length=max(a.chain_length, b.chain_length) + 1,
    )


def invert(a: Pose) -> Pose:
    rotation_t = a.rotation.T
    return Pose(rotation_t, -rotation_t @ a.translation, chain_length=a.chain_length + 1)


def relative_pose(prev_fine: Pose, cur_coarse: Pose) -> Pose:
    """Transform from previous-camera coordinates to current-camera coordinates.

    ``compose(relative_pose(prev, cur), prev)`` equals ``cur``.
    """

    r_rel = cur_coarse.rotation @ prev_fine.rotation.T
    t_rel = cur_coarse.translation - r_rel @ prev_fine.translation
    return Pose(
        r_rel,
        t_rel,
        chain_length=max(prev_fine.chain_length, cur_coarse.chain_length) + 1,
    )


def yaw_pose(angle: float, translation: Sequence[float] = (0.0, 0.0, 0.0)) -> Pose:
    """Pose rotating by ``angle`` radians about the camera's vertical (y) axis."""

    return Pose(Rotation.from_euler("y", angle).as_matrix(), np.asarray(translation, float))
