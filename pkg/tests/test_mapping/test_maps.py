"""Tests for the tracking map, the long-term map and relocalization."""

import io

import numpy as np
import pytest
from scipy.spatial import cKDTree

from segslam.exceptions import Degenerate, MapFormatError, ValidationError
from segslam.mapping import (
    DEFAULT_MERGE_RADIUS,
    NO_CLASS,
    LandmarkMap,
    LongTermMap,
    MapPoint,
    MappingConfig,
    Provenance,
    TrackingMap,
    descriptor_matches,
    load_map,
    map_from_bytes,
    map_to_bytes,
    read_map,
    relocalize,
    relocalize_estimate,
    save_map,
    update_long_term_map,
    update_tracking_map,
)
from segslam.mapping.serialization import FORMAT_VERSION, MAGIC
from segslam.segmentation import MotionState
from segslam.simulator import generate, second_pass
from segslam.tracking import TrackingConfig, classify_points


def map_from_frame(bundle, k=0, states=None):
    """Tracking and long-term maps built from one ground-truth frame."""
    frame = bundle.frames[k]
    points = classify_points(frame.observation, frame.segmentation)
    points = points.with_motion_states(states) if states else points.all_static()
    tm = update_tracking_map(
        TrackingMap.empty(bundle.spec.descriptor_bytes),
        frame.observation,
        points,
        frame.pose,
        bundle.camera,
    )
    ltm = update_long_term_map(LongTermMap.empty(bundle.spec.descriptor_bytes), tm)
    return tm, ltm, points


@pytest.fixture(scope="module")
def two_pass_bundles(two_pass_scene):
    return generate(two_pass_scene), second_pass(two_pass_scene)


class TestMapPoint:
    """Test landmark validation."""

    def test_background_points_have_no_class(self) -> None:
        with pytest.raises(ValidationError):
            MapPoint(np.zeros(3), b"\x00" * 4, Provenance.BACKGROUND, instance_class=3)

    def test_instance_points_need_a_class(self) -> None:
        with pytest.raises(ValidationError):
            MapPoint(np.zeros(3), b"\x00" * 4, Provenance.STATIC_INSTANCE)

    def test_from_points_round_trip(self) -> None:
        points = [
            MapPoint([0.0, 1.0, 2.0], b"\x01\x02", Provenance.BACKGROUND),
            MapPoint([1.0, 1.0, 2.0], b"\x03\x04", Provenance.STATIC_INSTANCE, 56, 3),
        ]
        landmark_map = LandmarkMap.from_points(points, descriptor_length=2)
        assert landmark_map.points == tuple(points)
        assert landmark_map.instance_classes.tolist() == [NO_CLASS, 56]


class TestTrackingMap:
    """Test keyframe insertion into the tracking map."""

    def test_points_land_on_true_landmarks(self, static_bundle) -> None:
        tm, _, points = map_from_frame(static_bundle)
        truth = static_bundle.landmark_positions[0]
        distances, _ = cKDTree(truth).query(tm.positions)
        assert distances.max() < 1e-9
        assert tm.count(Provenance.BACKGROUND) <= len(points.background)
        assert tm.count(Provenance.STATIC_INSTANCE) > 0
        assert tm.keyframe_poses[0][0] == 0

    def test_static_instance_points_keep_their_class(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        instance = tm.provenance == int(Provenance.STATIC_INSTANCE)
        assert set(tm.instance_classes[instance].tolist()) == {0, 56}
        assert set(tm.instance_classes[~instance].tolist()) == {NO_CLASS}

    def test_moving_instances_are_not_inserted(self, static_bundle) -> None:
        tm, _, points = map_from_frame(
            static_bundle, states={0: MotionState.MOVING, 1: MotionState.STATIC}
        )
        person = static_bundle.landmark_positions[0][static_bundle.object_landmark_ids(0)]
        distances, _ = cKDTree(person).query(tm.positions)
        assert distances.min() > DEFAULT_MERGE_RADIUS
        assert 0 not in tm.instance_classes.tolist()

    def test_repeated_keyframe_merges(self, static_bundle) -> None:
        frame = static_bundle.frames[0]
        tm, _, points = map_from_frame(static_bundle)
        again = update_tracking_map(tm, frame.observation, points, frame.pose, static_bundle.camera)
        assert len(again) == len(tm)
        assert np.all(again.observation_counts == tm.observation_counts + 1)
        assert len(again.keyframe_poses) == 2

    def test_points_stay_apart(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        for k in (3, 6):
            frame = static_bundle.frames[k]
            points = classify_points(frame.observation, frame.segmentation).all_static()
            tm = update_tracking_map(tm, frame.observation, points, frame.pose, static_bundle.camera)
        assert tm.min_pair_distance() >= DEFAULT_MERGE_RADIUS

    def test_crowded_candidates_collapse(self) -> None:
        landmark_map = TrackingMap.empty(2).merged_with(
            np.array([[0.0, 0.0, 1.0], [0.005, 0.0, 1.0], [0.5, 0.0, 1.0]]),
            np.zeros((3, 2), dtype=np.uint8),
            np.zeros(3, dtype=np.uint8),
            np.full(3, NO_CLASS),
            0.01,
        )
        assert len(landmark_map) == 2

    def test_update_returns_new_map(self, static_bundle) -> None:
        empty = TrackingMap.empty(static_bundle.spec.descriptor_bytes)
        map_from_frame(static_bundle)
        assert empty.is_empty

    def test_mapping_config_defaults(self) -> None:
        cfg = MappingConfig()
        assert cfg.merge_radius == DEFAULT_MERGE_RADIUS
        assert cfg.keyframe_interval == 5
        with pytest.raises(ValueError):
            MappingConfig(keyframe_interval=0)


class TestLongTermMap:
    """Test the background-only map."""

    def test_holds_background_only(self, static_bundle) -> None:
        tm, ltm, _ = map_from_frame(static_bundle)
        assert len(ltm) == tm.count(Provenance.BACKGROUND)
        assert ltm.count(Provenance.STATIC_INSTANCE) == 0
        ltm.check_purity()

    def test_rejects_instance_points(self) -> None:
        with pytest.raises(ValidationError):
            LongTermMap.from_points(
                [MapPoint([0.0, 0.0, 1.0], b"\x00", Provenance.STATIC_INSTANCE, 0)],
                descriptor_length=1,
            )

    def test_update_is_idempotent(self, static_bundle) -> None:
        tm, ltm, _ = map_from_frame(static_bundle)
        again = update_long_term_map(ltm, tm)
        assert len(again) == len(ltm)
        np.testing.assert_array_equal(again.observation_counts, ltm.observation_counts)


class TestSerialization:
    """Test the binary map file."""

    def test_tracking_map_round_trip(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        loaded = map_from_bytes(map_to_bytes(tm))
        assert isinstance(loaded, TrackingMap)
        np.testing.assert_array_equal(loaded.positions, tm.positions)
        np.testing.assert_array_equal(loaded.descriptors, tm.descriptors)
        np.testing.assert_array_equal(loaded.provenance, tm.provenance)
        np.testing.assert_array_equal(loaded.instance_classes, tm.instance_classes)
        np.testing.assert_array_equal(loaded.observation_counts, tm.observation_counts)
        assert loaded.keyframe_poses[0][1].allclose(tm.keyframe_poses[0][1], atol=0.0)

    def test_long_term_map_keeps_its_kind(self, static_bundle, tmp_path) -> None:
        _, ltm, _ = map_from_frame(static_bundle)
        path = tmp_path / "maps" / "ltm.bin"
        save_map(ltm, path)
        loaded = load_map(path)
        assert isinstance(loaded, LongTermMap)
        assert len(loaded) == len(ltm)

    def test_empty_map(self) -> None:
        loaded = map_from_bytes(map_to_bytes(TrackingMap.empty(32)))
        assert loaded.is_empty and loaded.keyframe_poses == ()

    def test_header_layout(self) -> None:
        data = map_to_bytes(LongTermMap.empty(32))
        assert data[:4] == MAGIC
        assert int.from_bytes(data[4:6], "little") == FORMAT_VERSION
        assert data[6] == 1

    def test_bad_magic(self, static_bundle) -> None:
        data = bytearray(map_to_bytes(map_from_frame(static_bundle)[0]))
        data[:4] = b"NOPE"
        with pytest.raises(MapFormatError):
            map_from_bytes(bytes(data))

    def test_unknown_version(self) -> None:
        data = bytearray(map_to_bytes(TrackingMap.empty(32)))
        data[4] = 99
        with pytest.raises(MapFormatError):
            read_map(io.BytesIO(bytes(data)))

    def test_truncated_file(self, static_bundle) -> None:
        data = map_to_bytes(map_from_frame(static_bundle)[0])
        with pytest.raises(MapFormatError):
            map_from_bytes(data[: len(data) // 2])

    def test_missing_file(self, tmp_path) -> None:
        with pytest.raises(MapFormatError):
            load_map(tmp_path / "absent.bin")


class TestRelocalization:
    """Test pose recovery against a stored map."""

    def test_descriptor_matches_are_exact(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        obs = static_bundle.frames[4].observation
        features, indices = descriptor_matches(tm, obs)
        assert features.size > 0
        np.testing.assert_array_equal(obs.descriptors[features], tm.descriptors[indices])

    def test_relocalizes_later_frame(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        frame = static_bundle.frames[6]
        pose = relocalize(tm, frame.observation, static_bundle.camera, TrackingConfig())
        assert pose.allclose(frame.pose, atol=1e-6)

    def test_second_pass_against_long_term_map(self, two_pass_bundles) -> None:
        first, replay = two_pass_bundles
        _, ltm, _ = map_from_frame(first)
        frame = replay.frames[0]
        estimate = relocalize_estimate(ltm, frame.observation, replay.camera, TrackingConfig())
        assert estimate.pose.allclose(frame.pose, atol=1e-6)

    def test_extra_seed_only(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        frame = static_bundle.frames[2]
        estimate = relocalize_estimate(
            tm,
            frame.observation,
            static_bundle.camera,
            TrackingConfig(),
            extra_seeds=[static_bundle.frames[1].pose],
            use_yaw_seeds=False,
        )
        assert estimate.pose.allclose(frame.pose, atol=1e-6)

    def test_empty_map(self, static_bundle) -> None:
        with pytest.raises(Degenerate):
            relocalize(
                TrackingMap.empty(32),
                static_bundle.frames[0].observation,
                static_bundle.camera,
                TrackingConfig(),
            )

    def test_too_few_matches(self, static_bundle) -> None:
        tm, _, _ = map_from_frame(static_bundle)
        with pytest.raises(Degenerate):
            relocalize(
                tm.subset(np.arange(len(tm)) < 3),
                static_bundle.frames[0].observation,
                static_bundle.camera,
                TrackingConfig(),
            )
