"""Synthetic RGB-D sequences with exact ground truth.

Random streams come from NumPy's PCG64 bit generator seeded through a
``SeedSequence``; each concern draws from its own spawn key so adding a
frame or an object never shifts another stream:

* ``(0,)`` landmark sampling,
* ``(1,)`` descriptors,
* ``(2, pass, frame)`` per-frame sensor noise, seeded by ``noise_seed``
  when the spec sets one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from ..exceptions import InvalidSpec, UnknownClass
from ..geometry import CameraModel, Pose, project_array
from ..segmentation import ClassTable, FrameSegmentation, SegmentedRegion
from ..tracking import FrameObservation
from .render import Box, occluded, render_frame
from .scene import LinearVelocity, ObjectSpec, RelocatedBetweenPasses, SceneSpec

if TYPE_CHECKING:
    from ..evaluation import Trajectory

logger = logging.getLogger(__name__)

MIN_LANDMARK_DEPTH = 0.1
BACKGROUND_OWNER = -1

_LANDMARK_STREAM = 0
_DESCRIPTOR_STREAM = 1
_NOISE_STREAM = 2


def _rng(seed: int, *spawn_key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


@dataclass(frozen=True, eq=False)
class GroundTruthFrame:
    observation: FrameObservation
    segmentation: FrameSegmentation
    pose: Pose


@dataclass(frozen=True, eq=False)
class GroundTruthBundle:
    """A generated sequence.

    Attributes:
        landmark_positions: World position of every landmark at every frame,
            shape ``(n_frames, n_landmarks, 3)``.
        landmark_owner: Object index per landmark, ``-1`` for background.
        pass_index: 0 for the first pass, 1 for :func:`second_pass`.
    """

    spec: SceneSpec
    camera: CameraModel
    class_table: ClassTable
    frames: tuple[GroundTruthFrame, ...]
    landmark_positions: NDArray[np.float64]
    landmark_descriptors: NDArray[np.uint8]
    landmark_owner: NDArray[np.int64]
    pass_index: int = 0

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def observations(self) -> tuple[FrameObservation, ...]:
        return tuple(f.observation for f in self.frames)

    @property
    def segmentations(self) -> tuple[FrameSegmentation, ...]:
        return tuple(f.segmentation for f in self.frames)

    @property
    def poses(self) -> tuple[Pose, ...]:
        return tuple(f.pose for f in self.frames)

    @property
    def timestamps(self) -> NDArray[np.float64]:
        return np.array([f.observation.timestamp for f in self.frames])

    @property
    def background_ids(self) -> NDArray[np.int64]:
        return np.flatnonzero(self.landmark_owner == BACKGROUND_OWNER)

    def object_landmark_ids(self, object_index: int) -> NDArray[np.int64]:
        return np.flatnonzero(self.landmark_owner == object_index)

    def trajectory(self) -> Trajectory:
        from ..evaluation import Trajectory

        return Trajectory(self.timestamps, self.poses)

    def truncated(self, n_frames: int) -> GroundTruthBundle:
        """The first ``n_frames`` frames of the sequence."""

        if not 1 <= n_frames <= len(self.frames):
            raise InvalidSpec(f"cannot truncate {len(self.frames)} frames to {n_frames}")
        return GroundTruthBundle(
            spec=self.spec,
            camera=self.camera,
            class_table=self.class_table,
            frames=self.frames[:n_frames],
            landmark_positions=self.landmark_positions[:n_frames],
            landmark_descriptors=self.landmark_descriptors,
            landmark_owner=self.landmark_owner,
            pass_index=self.pass_index,
        )


class SceneGenerator:
    """Renders the frames of a :class:`SceneSpec`.

    Landmarks and descriptors are sampled once in the constructor; both
    passes share them.
    """

    def __init__(self, spec: SceneSpec, class_table: ClassTable | None = None) -> None:
        self.spec = spec
        self.camera = spec.cam
        self.class_table = class_table or ClassTable.coco_default()
        for obj in spec.objects:
            if obj.class_id not in self.class_table:
                raise InvalidSpec(f"object class {obj.class_id} is not in the class table")

        rng = _rng(spec.seed, _LANDMARK_STREAM)
        self._background = _sample_room_walls(
            rng, spec.n_background_points, spec.room.min_corner, spec.room.max_corner
        )
        self._offsets = [
            _sample_box_surface(rng, obj.surface_point_count, obj.extents)
            for obj in spec.objects
        ]
        owner = [np.full(spec.n_background_points, BACKGROUND_OWNER, dtype=np.int64)]
        owner.extend(
            np.full(offsets.shape[0], k, dtype=np.int64) for k, offsets in enumerate(self._offsets)
        )
        self.landmark_owner = np.concatenate(owner)
        self.descriptors = _rng(spec.seed, _DESCRIPTOR_STREAM).integers(
            0, 256, size=(self.landmark_owner.size, spec.descriptor_bytes), dtype=np.uint8
        )
        logger.debug(
            "Scene seed %d: %d background and %d object landmarks",
            spec.seed,
            spec.n_background_points,
            self.landmark_owner.size - spec.n_background_points,
        )

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def generate(self, pass_index: int = 0) -> GroundTruthBundle:
        spec = self.spec
        frames = []
        positions = np.empty((spec.n_frames, self.landmark_owner.size, 3))
        for k in range(spec.n_frames):
            frame, positions[k] = self._frame(pass_index, k)
            frames.append(frame)
        positions.flags.writeable = False
        logger.info(
            "Generated %d frames (pass %d, seed %d)", spec.n_frames, pass_index + 1, spec.seed
        )
        return GroundTruthBundle(
            spec=spec,
            camera=self.camera,
            class_table=self.class_table,
            frames=tuple(frames),
            landmark_positions=positions,
            landmark_descriptors=self.descriptors,
            landmark_owner=self.landmark_owner,
            pass_index=pass_index,
        )

    def object_center(self, obj: ObjectSpec, pass_index: int, frame_index: int) -> NDArray[np.float64]:
        center = np.asarray(obj.center, dtype=np.float64)
        motion = obj.motion
        if isinstance(motion, LinearVelocity):
            return center + np.asarray(motion.velocity) * (frame_index / self.spec.frame_rate)
        if isinstance(motion, RelocatedBetweenPasses) and pass_index > 0:
            return np.asarray(motion.new_center, dtype=np.float64)
        return center

    def camera_pose(self, pass_index: int, frame_index: int) -> Pose:
        """World-to-camera pose of a frame."""

        rotation, center = self._camera_to_world(frame_index)
        if pass_index > 0:
            offset = self.spec.second_pass
            r_off = Rotation.from_euler("y", offset.yaw_deg, degrees=True).as_matrix()
            rotation = r_off @ rotation
            center = r_off @ center + np.asarray(offset.translation)
        world_to_camera = rotation.T
        return Pose(world_to_camera, -world_to_camera @ center)

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _camera_to_world(self, k: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        trajectory = self.spec.trajectory
        if trajectory.kind == "static":
            return np.eye(3), np.zeros(3)
        if trajectory.kind == "poses":
            assert trajectory.poses is not None
            row = trajectory.poses[k]
            pose = Pose.from_tum(row[:3], row[3:])
            return pose.rotation.T, pose.center

        n = self.spec.n_frames
        theta = math.radians(trajectory.sweep_deg) * k / (n - 1)
        spin = Rotation.from_euler("y", theta).as_matrix()
        look_at = np.asarray(trajectory.look_at, dtype=np.float64)
        center = look_at + spin @ (-look_at)
        center[1] += trajectory.bob_amplitude * math.sin(2.0 * math.pi * k / (n - 1))
        return spin, center

    def _boxes(self, pass_index: int, k: int) -> list[Box]:
        boxes = []
        for obj in self.spec.objects:
            center = self.object_center(obj, pass_index, k)
            half = np.asarray(obj.extents) / 2.0
            boxes.append((center - half, center + half))
        return boxes

    def _world_landmarks(self, boxes: list[Box]) -> NDArray[np.float64]:
        parts = [self._background]
        for (lower, upper), offsets in zip(boxes, self._offsets):
            parts.append((lower + upper) / 2.0 + offsets)
        return np.vstack(parts) if parts else np.empty((0, 3))

    def _check_camera(self, pose: Pose, boxes: list[Box], k: int) -> None:
        center = pose.center
        room = self.spec.room
        if np.any(center <= room.min_corner) or np.any(center >= room.max_corner):
            raise InvalidSpec(f"frame {k}: camera centre {center.round(3)} outside the room")
        for i, (lower, upper) in enumerate(boxes):
            if np.all(center >= lower) and np.all(center <= upper):
                raise InvalidSpec(f"frame {k}: camera centre inside object {i}")

    def _frame(self, pass_index: int, k: int) -> tuple[GroundTruthFrame, NDArray[np.float64]]:
        spec = self.spec
        cam = self.camera
        pose = self.camera_pose(pass_index, k)
        boxes = self._boxes(pass_index, k)
        self._check_camera(pose, boxes, k)
        world = self._world_landmarks(boxes)

        uv, z = project_array(cam, pose, world)
        in_view = cam.contains(uv) & (z > MIN_LANDMARK_DEPTH)
        visible = in_view.copy()
        visible[in_view] = ~occluded(pose.center, world[in_view], boxes)

        room_box = (np.asarray(spec.room.min_corner), np.asarray(spec.room.max_corner))
        depth_m, labels = render_frame(cam, pose, room_box, boxes)

        noise_seed = spec.seed if spec.noise_seed is None else spec.noise_seed
        noise = _rng(noise_seed, _NOISE_STREAM, pass_index, k)
        pixel_noise = noise.normal(0.0, 1.0, size=(world.shape[0], 2)) * spec.feature_noise_px
        depth_noise = noise.normal(0.0, 1.0, size=world.shape[0]) * spec.depth_noise
        grid_noise = noise.normal(0.0, 1.0, size=depth_m.shape) * spec.depth_noise

        ids = np.flatnonzero(visible)
        pixels = uv[ids] + pixel_noise[ids]
        metric = z[ids] + depth_noise[ids]
        keep = cam.contains(pixels) & (metric > 0)
        ids, pixels, metric = ids[keep], pixels[keep], metric[keep]

        owners = self.landmark_owner[ids]
        on_object = owners >= 0
        cols, rows = cam.pixel_cells(pixels[on_object])
        labels[rows, cols] = owners[on_object] + 1

        grid = np.clip(np.rint((depth_m + grid_noise) * cam.depth_factor), 0, np.iinfo(np.uint16).max)
        observation = FrameObservation(
            frame_index=k,
            timestamp=k / spec.frame_rate,
            pixels=pixels,
            raw_depth=metric * cam.depth_factor,
            descriptors=self.descriptors[ids],
            depth_grid=grid.astype(np.uint16),
            landmark_ids=ids,
        )
        return (
            GroundTruthFrame(observation, self._segmentation(k, labels), pose),
            world,
        )

    def _segmentation(self, k: int, labels: NDArray[np.int64]) -> FrameSegmentation:
        regions = []
        for index, obj in enumerate(self.spec.objects):
            mask = labels == index + 1
            if not mask.any():
                continue
            try:
                moveable = self.class_table.is_moveable(obj.class_id)
            except UnknownClass as exc:
                raise InvalidSpec(str(exc)) from exc
            regions.append(
                SegmentedRegion(
                    instance_id=index,
                    class_id=obj.class_id,
                    mask=mask,
                    moveable=moveable,
                )
            )
        height, width = labels.shape
        return FrameSegmentation(k, tuple(regions), width, height)


def _face_sample(
    rng: np.random.Generator,
    count: int,
    lower: NDArray[np.float64],
    upper: NDArray[np.float64],
    faces: Sequence[tuple[int, float]],
) -> NDArray[np.float64]:
    """Area-weighted uniform samples on axis-aligned faces ``(axis, value)``."""

    if count == 0:
        return np.empty((0, 3))
    extent = upper - lower
    areas = np.array([np.prod(np.delete(extent, axis)) for axis, _ in faces])
    choice = rng.choice(len(faces), size=count, p=areas / areas.sum())
    points = lower + rng.random((count, 3)) * extent
    for face_index, (axis, value) in enumerate(faces):
        points[choice == face_index, axis] = value
    return points


def _sample_room_walls(
    rng: np.random.Generator,
    count: int,
    min_corner: Sequence[float],
    max_corner: Sequence[float],
) -> NDArray[np.float64]:
    """Landmarks on every room face except the wall behind the camera."""

    lower = np.asarray(min_corner, dtype=np.float64)
    upper = np.asarray(max_corner, dtype=np.float64)
    faces = [(0, lower[0]), (0, upper[0]), (1, lower[1]), (1, upper[1]), (2, upper[2])]
    return _face_sample(rng, count, lower, upper, faces)


def _sample_box_surface(
    rng: np.random.Generator, count: int, extents: Sequence[float]
) -> NDArray[np.float64]:
    """Surface landmarks of a box as offsets from its centre."""

    half = np.asarray(extents, dtype=np.float64) / 2.0
    faces = [(axis, sign * half[axis]) for axis in range(3) for sign in (-1.0, 1.0)]
    return _face_sample(rng, count, -half, half, faces)


def generate(spec: SceneSpec, class_table: ClassTable | None = None) -> GroundTruthBundle:
    """Generate the first pass of a scene.

    Raises:
        InvalidSpec: If the camera leaves the room or enters an object, or an
            object class is unknown.
    """

    return SceneGenerator(spec, class_table).generate(pass_index=0)


def second_pass(spec: SceneSpec, class_table: ClassTable | None = None) -> GroundTruthBundle:
    """Regenerate the scene with relocated objects and the offset trajectory.

    Background landmarks and all descriptors match the first pass.

    Raises:
        InvalidSpec: If no object is relocated between passes.
    """

    if not spec.has_relocated_objects:
        raise InvalidSpec("second pass needs at least one relocated object")
    return SceneGenerator(spec, class_table).generate(pass_index=1)
