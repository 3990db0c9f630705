"""Tests for trajectories, TUM files and the absolute trajectory error."""

import math

import numpy as np
import pytest

from segslam.exceptions import DatasetError, InsufficientOverlap, ValidationError
from segslam.evaluation import (
    Trajectory,
    aggregate_ate,
    align_umeyama,
    associate_trajectories,
    ate,
    read_tum,
    write_tum,
)
from segslam.geometry import Pose


def trajectory_through(centers, stamps=None, rotation=None):
    """World-to-camera trajectory whose camera centres are ``centers``."""
    rotation = np.eye(3) if rotation is None else rotation
    poses = tuple(Pose(rotation, -rotation @ np.asarray(c, float)) for c in centers)
    stamps = np.arange(len(poses)) / 10.0 if stamps is None else stamps
    return Trajectory(stamps, poses)


SQUARE = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]


class TestTrajectory:
    """Test trajectory validation and TUM files."""

    def test_timestamps_must_increase(self) -> None:
        with pytest.raises(ValidationError):
            trajectory_through(SQUARE[:2], stamps=[1.0, 1.0])

    def test_length_mismatch(self) -> None:
        with pytest.raises(ValidationError):
            Trajectory([0.0, 1.0], (Pose.identity(),))

    def test_transformed_moves_centres(self, make_pose) -> None:
        traj = trajectory_through(SQUARE)
        world = make_pose()
        moved = traj.transformed(world)
        np.testing.assert_allclose(moved.centers, world.apply(traj.centers), atol=1e-12)

    def test_tum_round_trip(self, tmp_path, make_pose) -> None:
        traj = Trajectory([0.0, 0.1, 0.25], tuple(make_pose() for _ in range(3)))
        path = tmp_path / "out" / "traj.txt"
        write_tum(traj, path)
        loaded = read_tum(path)
        np.testing.assert_allclose(loaded.timestamps, traj.timestamps)
        for a, b in zip(loaded.poses, traj.poses):
            assert a.allclose(b, atol=1e-8)

    def test_tum_comments_and_blank_file(self, tmp_path) -> None:
        path = tmp_path / "traj.txt"
        path.write_text("# timestamp tx ty tz qx qy qz qw\n1.0 1 2 3 0 0 0 1\n")
        traj = read_tum(path)
        np.testing.assert_allclose(traj.centers, [[1.0, 2.0, 3.0]])
        empty = tmp_path / "empty.txt"
        empty.write_text("")
        assert len(read_tum(empty)) == 0

    def test_tum_errors(self, tmp_path) -> None:
        with pytest.raises(DatasetError):
            read_tum(tmp_path / "missing.txt")
        short = tmp_path / "short.txt"
        short.write_text("1.0 1 2 3\n")
        with pytest.raises(DatasetError):
            read_tum(short)
        backwards = tmp_path / "backwards.txt"
        backwards.write_text("2.0 0 0 0 0 0 0 1\n1.0 0 0 0 0 0 0 1\n")
        with pytest.raises(DatasetError):
            read_tum(backwards)

    def test_association_by_nearest_stamp(self) -> None:
        est = trajectory_through(SQUARE, stamps=[0.0, 0.105, 0.2, 0.5])
        gt = trajectory_through(SQUARE, stamps=[0.0, 0.1, 0.2, 0.3])
        est_idx, gt_idx = associate_trajectories(est, gt)
        assert est_idx.tolist() == [0, 1, 2]
        assert gt_idx.tolist() == [0, 1, 2]


class TestAte:
    """Test aligned trajectory error."""

    def test_identical_trajectories(self) -> None:
        traj = trajectory_through(SQUARE)
        report = ate(traj, traj)
        assert report.rmse == pytest.approx(0.0, abs=1e-12)
        assert report.n_runs == 1
        assert report.median == report.min == report.max == report.rmse

    def test_rigid_motion_is_aligned_away(self, make_pose) -> None:
        gt = trajectory_through(SQUARE + [[0.5, 0.2, 0.7]])
        world = make_pose(angle=1.0, shift=3.0)
        report = ate(gt.transformed(world), gt)
        assert report.rmse == pytest.approx(0.0, abs=1e-9)
        assert align_umeyama(gt.transformed(world), gt).allclose(world.inverse(), atol=1e-9)

    def test_scaled_square(self) -> None:
        gt = trajectory_through(SQUARE)
        centre = np.array([0.5, 0.5, 0.0])
        est = trajectory_through([centre + 2.0 * (np.array(c) - centre) for c in SQUARE])
        report = ate(est, gt)
        assert report.rmse == pytest.approx(math.sqrt(0.5))
        assert report.per_frame_errors == pytest.approx((math.sqrt(0.5),) * 4)

    def test_single_bad_frame(self) -> None:
        t = np.linspace(0.0, 2.0 * np.pi, 100, endpoint=False)
        centers = np.column_stack([np.cos(t), np.sin(t), 0.1 * t])
        gt = trajectory_through(centers)
        moved = centers.copy()
        moved[40] += [0.1, 0.0, 0.0]
        report = ate(trajectory_through(moved), gt)
        assert report.rmse <= 0.01 + 1e-12

    def test_needs_three_pairs(self) -> None:
        with pytest.raises(InsufficientOverlap):
            ate(trajectory_through(SQUARE[:2]), trajectory_through(SQUARE[:2]))

    def test_disjoint_stamps(self) -> None:
        est = trajectory_through(SQUARE, stamps=[10.0, 11.0, 12.0, 13.0])
        with pytest.raises(InsufficientOverlap):
            ate(est, trajectory_through(SQUARE))

    def test_several_runs(self) -> None:
        gt = trajectory_through(SQUARE)
        centre = np.array([0.5, 0.5, 0.0])
        runs = [
            trajectory_through([centre + s * (np.array(c) - centre) for c in SQUARE])
            for s in (1.0, 2.0, 3.0)
        ]
        report = ate(runs, gt)
        expected = [0.0, math.sqrt(0.5), 2.0 * math.sqrt(0.5)]
        assert report.n_runs == 3
        assert report.run_rmses == pytest.approx(expected, abs=1e-12)
        assert report.median == pytest.approx(expected[1])
        assert report.min == pytest.approx(0.0, abs=1e-12)
        assert report.max == pytest.approx(expected[2])
        pooled = math.sqrt((0.0 + 0.5 + 2.0) / 3.0)
        assert report.rmse == pytest.approx(pooled)

    def test_aggregate_is_order_independent(self) -> None:
        gt = trajectory_through(SQUARE)
        centre = np.array([0.5, 0.5, 0.0])
        reports = [
            ate(trajectory_through([centre + s * (np.array(c) - centre) for c in SQUARE]), gt)
            for s in (1.5, 2.5)
        ]
        forward, backward = aggregate_ate(reports), aggregate_ate(reports[::-1])
        assert forward.rmse == pytest.approx(backward.rmse)
        assert forward.median == pytest.approx(backward.median)

    def test_aggregate_of_nothing(self) -> None:
        with pytest.raises(InsufficientOverlap):
            aggregate_ate([])
