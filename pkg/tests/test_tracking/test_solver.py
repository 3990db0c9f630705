"""Tests for the robust pose solver."""

import numpy as np
import pytest

from segslam.exceptions import Degenerate, ValidationError
from segslam.geometry import Pose, compose, project_array
from segslam.tracking import (
    CorrespondenceSet,
    TrackingConfig,
    cost_gradient,
    estimate_pose,
    huber,
    predict_pose,
    reprojection_cost,
)


def scene_points(rng, n=120):
    """Points spread over a box 1.5-4 m in front of the camera."""
    return np.column_stack(
        [rng.uniform(-1.0, 1.0, n), rng.uniform(-0.8, 0.8, n), rng.uniform(1.5, 4.0, n)]
    )


def observe(camera, pose, points, rng=None, noise=0.0):
    uv, _ = project_array(camera, pose, points)
    if rng is not None and noise:
        uv = uv + rng.normal(0.0, noise, uv.shape)
    return CorrespondenceSet(points, uv)


class TestHuber:
    """Test the robust kernel."""

    def test_quadratic_then_linear(self) -> None:
        np.testing.assert_allclose(huber(np.array([0.0, 1.0, 2.0, 3.0]), 2.0), [0.0, 0.5, 2.0, 4.0])

    def test_symmetric(self) -> None:
        assert huber(np.array([-3.0]), 2.0)[0] == huber(np.array([3.0]), 2.0)[0]


class TestCorrespondenceSet:
    """Test correspondence validation."""

    def test_length_mismatch(self) -> None:
        with pytest.raises(ValidationError):
            CorrespondenceSet(np.zeros((3, 3)), np.zeros((2, 2)))

    def test_from_pairs(self) -> None:
        corr = CorrespondenceSet.from_pairs([((0.0, 0.0, 1.0), (1.0, 2.0))] * 4)
        assert len(corr) == 4
        assert corr.pixels.shape == (4, 2)


class TestEstimatePose:
    """Test pose recovery from 2D-3D correspondences."""

    def test_recovers_noise_free_pose(self, camera, rng, make_pose) -> None:
        truth = make_pose(angle=0.2, shift=0.3)
        corr = observe(camera, truth, scene_points(rng))
        start = truth.retract([0.03, -0.02, 0.04, 0.02, -0.03, 0.01])
        estimate = estimate_pose(corr, camera, start)
        assert estimate.pose.allclose(truth, atol=1e-6)
        assert estimate.cost < 1e-8

    def test_recovers_random_noise_free_poses(self, camera, rng, make_pose) -> None:
        """Exact recovery with a non-increasing cost on 100 random problems."""
        for _ in range(100):
            truth = make_pose(angle=0.4, shift=0.5)
            corr = observe(camera, truth, scene_points(rng, int(rng.integers(20, 121))))
            start = truth.retract(rng.uniform(-0.03, 0.03, 6))
            estimate = estimate_pose(corr, camera, start)

            assert estimate.pose.rotation_angle_to(truth) < 1e-6
            assert np.linalg.norm(estimate.pose.translation - truth.translation) < 1e-6
            assert np.all(np.diff(estimate.history) <= 0.0)

    def test_cost_history_never_increases(self, camera, rng, make_pose) -> None:
        truth = make_pose()
        corr = observe(camera, truth, scene_points(rng), rng, noise=1.0)
        start = truth.retract([0.1, 0.05, -0.1, 0.05, 0.02, -0.04])
        estimate = estimate_pose(corr, camera, start)
        assert estimate.history[0] == pytest.approx(reprojection_cost(corr, camera, start, 2.0))
        assert np.all(np.diff(estimate.history) <= 0.0)
        assert estimate.cost == estimate.history[-1]
        assert 1 <= estimate.iterations <= TrackingConfig().max_iterations

    def test_outliers_are_down_weighted(self, camera, rng, make_pose) -> None:
        truth = make_pose()
        points = scene_points(rng, 100)
        corr = observe(camera, truth, points)
        pixels = corr.pixels.copy()
        angles = rng.uniform(0.0, 2.0 * np.pi, 10)
        pixels[:10] += 40.0 * np.column_stack([np.cos(angles), np.sin(angles)])
        estimate = estimate_pose(CorrespondenceSet(points, pixels), camera, truth)
        assert np.linalg.norm(estimate.pose.center - truth.center) < 0.01
        assert estimate.pose.rotation_angle_to(truth) < 0.005

    def test_too_few_correspondences(self, camera, rng) -> None:
        corr = observe(camera, Pose.identity(), scene_points(rng, 5))
        with pytest.raises(Degenerate):
            estimate_pose(corr, camera, Pose.identity())

    def test_configured_minimum_is_enforced(self, camera, rng) -> None:
        corr = observe(camera, Pose.identity(), scene_points(rng, 10))
        with pytest.raises(Degenerate):
            estimate_pose(corr, camera, Pose.identity(), TrackingConfig(min_correspondences=20))

    def test_collinear_points_are_degenerate(self, camera) -> None:
        points = np.column_stack([np.zeros(8), np.zeros(8), np.linspace(1.0, 3.0, 8)])
        corr = observe(camera, Pose.identity(), points)
        with pytest.raises(Degenerate):
            estimate_pose(corr, camera, Pose.identity())

    def test_minimum_of_six_in_config(self) -> None:
        with pytest.raises(ValueError):
            TrackingConfig(min_correspondences=5)


class TestCostGradient:
    """Compare the analytic gradient with central differences."""

    @pytest.mark.parametrize("delta", [2.0, 1e6])
    def test_matches_finite_differences(self, camera, rng, make_pose, delta) -> None:
        truth = make_pose()
        corr = observe(camera, truth, scene_points(rng, 60), rng, noise=3.0)
        pose = truth.retract([0.02, -0.01, 0.03, 0.01, 0.02, -0.01])
        analytic = cost_gradient(corr, camera, pose, delta)

        h = 1e-6
        numeric = np.zeros(6)
        for i in range(6):
            step = np.zeros(6)
            step[i] = h
            plus = reprojection_cost(corr, camera, pose.retract(step), delta)
            minus = reprojection_cost(corr, camera, pose.retract(-step), delta)
            numeric[i] = (plus - minus) / (2.0 * h)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-4)

    def test_points_behind_camera_are_penalised(self, camera) -> None:
        points = np.array([[0.0, 0.0, 2.0], [0.0, 0.0, -2.0]])
        pixels = np.array([[79.5, 59.5], [79.5, 59.5]])
        cost = reprojection_cost(CorrespondenceSet(points, pixels), camera, Pose.identity(), 2.0)
        assert cost > 1e3


class TestPredictPose:
    """Test the constant-velocity motion prior."""

    def test_first_frame_repeats_pose(self, make_pose) -> None:
        pose = make_pose()
        assert predict_pose(None, pose) is pose

    def test_repeats_last_motion(self, make_pose) -> None:
        step = make_pose(angle=0.05, shift=0.05)
        p0 = make_pose()
        p1 = compose(step, p0)
        assert predict_pose(p0, p1).allclose(compose(step, p1), atol=1e-12)
