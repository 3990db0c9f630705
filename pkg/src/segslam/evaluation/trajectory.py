"""Timestamped camera trajectories and TUM-format text files.

A TUM row is ``timestamp tx ty tz qx qy qz qw`` giving the camera-to-world
position and orientation; :class:`Trajectory` keeps world-to-camera poses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from ..exceptions import DatasetError, ValidationError
from ..geometry import Pose

logger = logging.getLogger(__name__)

DEFAULT_MAX_DT = 0.02
TUM_COLUMNS = ["timestamp", "tx", "ty", "tz", "qx", "qy", "qz", "qw"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Poses with strictly increasing timestamps (seconds)."""

    timestamps: NDArray[np.float64]
    poses: tuple[Pose, ...]

    def __post_init__(self) -> None:
        stamps = np.array(self.timestamps, dtype=np.float64).reshape(-1)
        poses = tuple(self.poses)
        if stamps.size != len(poses):
            raise ValidationError(
                f"{stamps.size} timestamps for {len(poses)} poses"
            )
        if stamps.size > 1 and np.any(np.diff(stamps) <= 0):
            raise ValidationError("trajectory timestamps must be strictly increasing")
        stamps.flags.writeable = False
        object.__setattr__(self, "timestamps", stamps)
        object.__setattr__(self, "poses", poses)

    @classmethod
    def empty(cls) -> Trajectory:
        return cls(np.empty(0), ())

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self) -> Iterator[tuple[float, Pose]]:
        return zip(self.timestamps.tolist(), self.poses)

    @property
    def centers(self) -> NDArray[np.float64]:
        """Camera positions in world coordinates, shape ``(N, 3)``."""

        if not self.poses:
            return np.empty((0, 3))
        return np.array([pose.center for pose in self.poses])

    def transformed(self, world: Pose) -> Trajectory:
        """Re-express the trajectory in a world frame moved by ``world``.

        Camera centres map to ``world.apply(center)``.
        """

        inverse = world.inverse()
        return Trajectory(self.timestamps, tuple(p.compose(inverse) for p in self.poses))

    def subset(self, indices: ArrayLike) -> Trajectory:
        selection = np.asarray(indices)
        if selection.dtype == bool:
            selection = np.flatnonzero(selection)
        return Trajectory(
            self.timestamps[selection], tuple(self.poses[int(i)] for i in selection)
        )

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for stamp, pose in self:
            position, quat = pose.to_tum()
            rows.append([stamp, *position.tolist(), *quat.tolist()])
        return pd.DataFrame(rows, columns=TUM_COLUMNS)


def associate_trajectories(
    est: Trajectory, gt: Trajectory, max_dt: float = DEFAULT_MAX_DT
) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """Pair poses by nearest timestamp, each pose used at most once.

    Candidate pairs closer than ``max_dt`` are taken greedily in order of
    increasing time difference. Returns index arrays sorted by ``est`` index.
    """

    if len(est) == 0 or len(gt) == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    dt = np.abs(est.timestamps[:, None] - gt.timestamps[None, :])
    est_idx, gt_idx = np.nonzero(dt < max_dt)
    order = np.lexsort((gt_idx, est_idx, dt[est_idx, gt_idx]))
    used_est: set[int] = set()
    used_gt: set[int] = set()
    pairs = []
    for k in order:
        i, j = int(est_idx[k]), int(gt_idx[k])
        if i in used_est or j in used_gt:
            continue
        used_est.add(i)
        used_gt.add(j)
        pairs.append((i, j))
    pairs.sort()
    if not pairs:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    matched = np.array(pairs, dtype=np.int64)
    return matched[:, 0], matched[:, 1]


def trajectory_from_rows(stamps: Sequence[float], rows: ArrayLike) -> Trajectory:
    values = np.asarray(rows, dtype=np.float64).reshape(-1, 7)
    poses = tuple(Pose.from_tum(row[:3], row[3:]) for row in values)
    return Trajectory(np.asarray(stamps, dtype=np.float64), poses)


def read_tum(path: Path) -> Trajectory:
    """Read a TUM trajectory file (``#`` comments allowed).

    Raises:
        DatasetError: If the file is missing or malformed.
    """

    if not path.exists():
        raise DatasetError(f"trajectory file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            sep=r"\s+",
            comment="#",
            header=None,
            names=TUM_COLUMNS,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        return Trajectory.empty()
    except (pd.errors.ParserError, ValueError) as exc:
        raise DatasetError(f"malformed trajectory file {path}: {exc}") from exc
    if frame.isna().any().any():
        raise DatasetError(f"trajectory file {path} has missing columns")
    try:
        return trajectory_from_rows(
            frame["timestamp"].to_numpy(), frame[TUM_COLUMNS[1:]].to_numpy()
        )
    except ValidationError as exc:
        raise DatasetError(f"invalid trajectory in {path}: {exc}") from exc


def write_tum(trajectory: Trajectory, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory.to_frame().to_csv(
        path, sep=" ", header=False, index=False, float_format="%.9f"
    )
    logger.debug("Wrote %d poses to %s", len(trajectory), path)
