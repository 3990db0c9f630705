"""Tests for the pinhole camera model and the projection chain."""

import numpy as np
import pytest

from segslam.exceptions import BehindCamera, ValidationError, ZeroDepth
from segslam.geometry import (
    CameraModel,
    Pose,
    back_project,
    back_project_array,
    project,
    project_array,
)


class TestCameraModel:
    """Test intrinsic validation and pixel helpers."""

    def test_rejects_non_positive_focal_length(self) -> None:
        with pytest.raises(ValidationError):
            CameraModel(fx=0.0, fy=100.0, cx=10.0, cy=10.0, width=20, height=20)

    def test_rejects_principal_point_outside_image(self) -> None:
        with pytest.raises(ValidationError):
            CameraModel(fx=100.0, fy=100.0, cx=25.0, cy=10.0, width=20, height=20)

    def test_rejects_non_finite_values(self) -> None:
        with pytest.raises(ValidationError):
            CameraModel(fx=float("nan"), fy=100.0, cx=10.0, cy=10.0, width=20, height=20)

    def test_intrinsic_matrix(self, camera: CameraModel) -> None:
        k = camera.intrinsic_matrix
        assert k[0, 0] == 130.0 and k[1, 1] == 130.0
        assert k[0, 2] == 79.5 and k[1, 2] == 59.5
        assert k[2, 2] == 1.0

    def test_shape_is_rows_then_columns(self, camera: CameraModel) -> None:
        assert camera.shape == (120, 160)

    def test_pixel_cells_round_half_up(self, camera: CameraModel) -> None:
        cols, rows = camera.pixel_cells(np.array([[0.49, 0.5], [10.5, 3.2]]))
        assert cols.tolist() == [0, 11]
        assert rows.tolist() == [1, 3]

    def test_contains_handles_borders_and_nan(self, camera: CameraModel) -> None:
        uv = np.array([[-0.4, 0.0], [-0.6, 0.0], [159.4, 119.4], [159.5, 10.0], [np.nan, 3.0]])
        assert camera.contains(uv).tolist() == [True, False, True, False, False]

    def test_mapping_round_trip(self, camera: CameraModel) -> None:
        assert CameraModel.from_mapping(camera.to_mapping()) == camera

    def test_from_mapping_requires_intrinsics(self) -> None:
        with pytest.raises(ValidationError):
            CameraModel.from_mapping({"fx": 1.0, "fy": 1.0, "cx": 0.0})


class TestProjection:
    """Test back-projection and projection."""

    def test_principal_point_lifts_onto_optical_axis(self, camera: CameraModel) -> None:
        point = back_project(camera, (79.5, 59.5), 2000.0)
        np.testing.assert_allclose(point, [0.0, 0.0, 2.0], atol=1e-12)

    def test_depth_factor_scales_raw_depth(self) -> None:
        cam = CameraModel(fx=100.0, fy=100.0, cx=50.0, cy=40.0, depth_factor=5000.0, width=100, height=80)
        point = back_project(cam, (150.0, 40.0), 10000.0)
        np.testing.assert_allclose(point, [2.0, 0.0, 2.0])

    def test_zero_depth_raises(self, camera: CameraModel) -> None:
        with pytest.raises(ZeroDepth):
            back_project(camera, (10.0, 10.0), 0.0)

    def test_negative_depth_rejected(self, camera: CameraModel) -> None:
        with pytest.raises(ValidationError):
            back_project(camera, (10.0, 10.0), -1.0)

    def test_round_trip_with_identity(self, camera: CameraModel, rng) -> None:
        n = 10_000
        uv = np.column_stack([rng.uniform(0, 159, n), rng.uniform(0, 119, n)])
        depth = rng.uniform(100.0, 8000.0, n)
        points = back_project_array(camera, uv, depth)
        projected, z = project_array(camera, Pose.identity(), points)
        assert np.max(np.linalg.norm(projected - uv, axis=1)) < 1e-9
        np.testing.assert_allclose(z, depth / camera.depth_factor)

    def test_round_trip_with_vga_intrinsics(self, rng) -> None:
        camera = CameraModel(
            fx=525.0, fy=525.0, cx=319.5, cy=239.5, width=640, height=480, depth_factor=5000.0
        )
        n = 10_000
        uv = np.column_stack([rng.uniform(0, 639, n), rng.uniform(0, 479, n)])
        depth = rng.integers(1, 65536, n).astype(np.float64)
        projected, _ = project_array(camera, Pose.identity(), back_project_array(camera, uv, depth))
        assert np.max(np.linalg.norm(projected - uv, axis=1)) < 1e-9

    def test_point_behind_camera_raises(self, camera: CameraModel) -> None:
        with pytest.raises(BehindCamera):
            project(camera, Pose.identity(), (0.0, 0.0, -1.0))

    def test_point_on_image_plane_raises(self, camera: CameraModel) -> None:
        with pytest.raises(BehindCamera):
            project(camera, Pose.identity(), (1.0, 0.0, 0.0))

    def test_project_array_marks_points_behind_with_nan(self, camera: CameraModel) -> None:
        uv, z = project_array(camera, Pose.identity(), [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        assert np.isfinite(uv[0]).all()
        assert np.isnan(uv[1]).all()
        assert z.tolist() == [1.0, -1.0]

    def test_image_scale_divides_projection(self) -> None:
        cam = CameraModel(fx=100.0, fy=100.0, cx=50.0, cy=40.0, image_scale=2.0, width=100, height=80)
        uv = project(cam, Pose.identity(), (0.5, 0.0, 1.0))
        np.testing.assert_allclose(uv, [50.0, 20.0])

    def test_project_applies_pose(self, camera: CameraModel) -> None:
        shifted = Pose(np.eye(3), [0.0, 0.0, 1.0])
        uv = project(camera, shifted, (1.0, 0.0, 1.0))
        np.testing.assert_allclose(uv, [79.5 + 65.0, 59.5])

    def test_worked_example_vga(self) -> None:
        cam = CameraModel(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)
        np.testing.assert_allclose(back_project(cam, (420.0, 240.0), 2000.0), [0.4, 0.0, 2.0])
        shifted = Pose(np.eye(3), [0.1, 0.0, 0.0])
        np.testing.assert_allclose(project(cam, shifted, [0.0, 0.0, 1.0]), [370.0, 240.0])
