"""Tests for association, point classification, motion judgment and tracking."""

from types import SimpleNamespace

import numpy as np
import pytest

from segslam.exceptions import DimensionMismatch
from segslam.segmentation import FrameSegmentation, MotionState
from segslam.simulator import generate
from segslam.tracking import (
    ClassifiedPoints,
    TrackingConfig,
    associate,
    classify_points,
    coarse_track,
    fine_track,
    hamming_distances,
    judge_motion,
)


def landmarks_at(bundle, frame_index=0):
    """Map view holding every landmark where it was at ``frame_index``."""
    return SimpleNamespace(
        positions=bundle.landmark_positions[frame_index],
        descriptors=bundle.landmark_descriptors,
    )


@pytest.fixture(scope="module")
def dynamic_bundle(dynamic_scene):
    return generate(dynamic_scene)


class TestHamming:
    def test_counts_differing_bits(self) -> None:
        a = np.zeros(4, dtype=np.uint8)
        others = np.array([[0, 0, 0, 0], [255, 0, 0, 0], [255, 255, 255, 255], [1, 2, 4, 8]], dtype=np.uint8)
        assert hamming_distances(a, others).tolist() == [0, 8, 32, 4]


class TestAssociate:
    """Test projection-gated descriptor association."""

    def test_matches_true_landmarks(self, static_bundle) -> None:
        frame = static_bundle.frames[3]
        obs = frame.observation
        matches = associate(
            obs,
            np.arange(obs.n_features),
            landmarks_at(static_bundle),
            static_bundle.camera,
            frame.pose,
            TrackingConfig(),
        )
        assert len(matches) >= 0.9 * obs.n_features
        np.testing.assert_array_equal(obs.landmark_ids[matches.feature_indices], matches.map_indices)
        assert np.all(matches.descriptor_distances == 0)

    def test_far_guess_finds_nothing(self, static_bundle) -> None:
        frame = static_bundle.frames[3]
        obs = frame.observation
        guess = frame.pose.retract([2.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        matches = associate(
            obs,
            np.arange(obs.n_features),
            landmarks_at(static_bundle),
            static_bundle.camera,
            guess,
            TrackingConfig(),
        )
        assert len(matches) < 0.05 * obs.n_features

    def test_empty_selection(self, static_bundle) -> None:
        frame = static_bundle.frames[0]
        matches = associate(
            frame.observation,
            [],
            landmarks_at(static_bundle),
            static_bundle.camera,
            frame.pose,
            TrackingConfig(),
        )
        assert len(matches) == 0


class TestClassifyPoints:
    """Test the background / instance partition of features."""

    def test_partition_follows_masks(self, static_bundle) -> None:
        frame = static_bundle.frames[2]
        obs = frame.observation
        points = classify_points(obs, frame.segmentation)
        owners = static_bundle.landmark_owner[obs.landmark_ids]

        assert set(points.per_instance) == set(frame.segmentation.instance_ids)
        for instance_id, members in points.per_instance.items():
            own = set(np.flatnonzero(owners == instance_id).tolist())
            assert own <= set(members)
        assert not set(points.background) & set(np.flatnonzero(owners >= 0).tolist())
        assert points.instance_classes == {0: 0, 1: 56}

        everything = set(points.background).union(*map(set, points.per_instance.values()))
        assert everything == set(range(obs.n_features))

    def test_empty_segmentation_is_all_background(self, static_bundle) -> None:
        obs = static_bundle.frames[0].observation
        height, width = obs.shape
        points = classify_points(obs, FrameSegmentation.empty(0, width, height))
        assert len(points.background) == obs.n_features
        assert points.per_instance == {}

    def test_size_mismatch(self, static_bundle) -> None:
        obs = static_bundle.frames[0].observation
        with pytest.raises(DimensionMismatch):
            classify_points(obs, FrameSegmentation.empty(0, 10, 10))

    def test_index_views(self) -> None:
        points = ClassifiedPoints(
            background=[0, 5],
            per_instance={1: [2, 3], 4: [1]},
            motion_state={1: MotionState.STATIC, 4: MotionState.MOVING},
            instance_classes={1: 56, 4: 0},
        )
        assert points.static_indices().tolist() == [0, 2, 3, 5]
        assert points.moving_indices().tolist() == [1]
        assert points.counts() == {"background": 2, "static_instance": 2, "moving": 1}
        assert points.all_static().moving_indices().size == 0


class TestJudgeMotion:
    """Test per-instance motion voting against the map."""

    def test_static_scene_is_static(self, static_bundle) -> None:
        frame = static_bundle.frames[8]
        points = classify_points(frame.observation, frame.segmentation)
        judged = judge_motion(
            points,
            frame.observation,
            frame.pose,
            landmarks_at(static_bundle),
            static_bundle.camera,
            TrackingConfig(),
        )
        assert judged.motion_state == {0: MotionState.STATIC, 1: MotionState.STATIC}

    def test_walking_person_is_moving(self, dynamic_bundle) -> None:
        frame = dynamic_bundle.frames[8]
        points = classify_points(frame.observation, frame.segmentation)
        judged = judge_motion(
            points,
            frame.observation,
            frame.pose,
            landmarks_at(dynamic_bundle),
            dynamic_bundle.camera,
            TrackingConfig(),
        )
        assert judged.motion_state[0] is MotionState.MOVING
        assert judged.motion_state[1] is MotionState.STATIC

    def test_instance_without_votes_is_moving(self, static_bundle) -> None:
        frame = static_bundle.frames[4]
        points = classify_points(frame.observation, frame.segmentation)
        empty_map = SimpleNamespace(
            positions=np.empty((0, 3)),
            descriptors=np.empty((0, static_bundle.spec.descriptor_bytes), dtype=np.uint8),
        )
        judged = judge_motion(
            points, frame.observation, frame.pose, empty_map, static_bundle.camera, TrackingConfig()
        )
        assert set(judged.motion_state.values()) == {MotionState.MOVING}


class TestTracking:
    """Test coarse and fine tracking against a landmark map."""

    def test_coarse_track_recovers_pose(self, static_bundle) -> None:
        prev, cur = static_bundle.frames[5], static_bundle.frames[6]
        estimate = coarse_track(
            cur.observation, landmarks_at(static_bundle), static_bundle.camera, prev.pose, TrackingConfig()
        )
        assert estimate.pose.allclose(cur.pose, atol=1e-6)

    def test_fine_track_ignores_moving_person(self, dynamic_bundle) -> None:
        prev, cur = dynamic_bundle.frames[9], dynamic_bundle.frames[10]
        cfg = TrackingConfig()
        landmarks = landmarks_at(dynamic_bundle)
        points = classify_points(cur.observation, cur.segmentation)
        judged = judge_motion(points, cur.observation, cur.pose, landmarks, dynamic_bundle.camera, cfg)
        fine = fine_track(cur.observation, judged, landmarks, dynamic_bundle.camera, prev.pose, cfg)
        assert np.linalg.norm(fine.center - cur.pose.center) < 1e-4
        assert fine.rotation_angle_to(cur.pose) < 1e-4
