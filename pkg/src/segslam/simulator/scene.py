"""Scene specifications for the synthetic RGB-D simulator.

A scene is an axis-aligned room whose walls carry the background landmarks,
plus box-shaped objects with surface landmarks. Coordinates follow the
camera convention of the first frame: x right, y down, z forward.

Example ``scene.yaml``::

    seed: 3
    n_frames: 60
    n_background_points: 1000
    feature_noise_px: 0.5
    objects:
      - class_id: 0
        center: [0.4, 0.2, 2.0]
        extents: [0.4, 0.8, 0.4]
        surface_point_count: 120
        motion: {kind: linear_velocity, velocity: [0.3, 0.0, 0.0]}
"""

from __future__ import annotations

import logging
import tomllib
from pathlib import Path
from typing import Annotated, Any, Literal, Mapping, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from ..exceptions import InvalidSpec, ValidationError
from ..geometry import CameraModel

logger = logging.getLogger(__name__)

Vector3 = tuple[float, float, float]


class _SpecModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class StaticMotion(_SpecModel):
    kind: Literal["static"] = "static"


class LinearVelocity(_SpecModel):
    """Constant velocity in m/s, applied from the first frame on."""

    kind: Literal["linear_velocity"] = "linear_velocity"
    velocity: Vector3


class RelocatedBetweenPasses(_SpecModel):
    """Static within a pass; sits at ``new_center`` during the second pass."""

    kind: Literal["relocated"] = "relocated"
    new_center: Vector3


Motion = Annotated[
    Union[StaticMotion, LinearVelocity, RelocatedBetweenPasses],
    Field(discriminator="kind"),
]


class ObjectSpec(_SpecModel):
    """An axis-aligned box object with landmarks sampled on its surface."""

    class_id: int = Field(ge=0)
    center: Vector3
    extents: Vector3
    surface_point_count: int = Field(default=100, ge=4)
    motion: Motion = Field(default_factory=StaticMotion)

    @field_validator("extents")
    @classmethod
    def _positive_extents(cls, value: Vector3) -> Vector3:
        if min(value) <= 0:
            raise ValueError("box extents must be > 0")
        return value


class RoomSpec(_SpecModel):
    min_corner: Vector3 = (-3.0, -2.0, -1.0)
    max_corner: Vector3 = (3.0, 2.0, 6.0)

    @model_validator(mode="after")
    def _ordered(self) -> RoomSpec:
        if any(lo >= hi for lo, hi in zip(self.min_corner, self.max_corner)):
            raise ValueError("room min_corner must be below max_corner on every axis")
        return self


class TrajectorySpec(_SpecModel):
    """Camera path.

    ``static`` keeps the identity pose, ``arc`` orbits ``look_at`` about the
    vertical axis by ``sweep_deg`` over the sequence, starting at the identity
    pose, and ``poses`` lists explicit TUM rows ``tx ty tz qx qy qz qw``
    (camera-to-world), one per frame.
    """

    kind: Literal["static", "arc", "poses"] = "arc"
    look_at: Vector3 = (0.0, 0.0, 2.5)
    sweep_deg: float = 20.0
    bob_amplitude: float = Field(default=0.0, ge=0.0)
    poses: list[tuple[float, float, float, float, float, float, float]] | None = None

    @model_validator(mode="after")
    def _poses_present(self) -> TrajectorySpec:
        if self.kind == "poses" and not self.poses:
            raise ValueError("trajectory kind 'poses' needs a poses list")
        return self


class CameraSpec(_SpecModel):
    fx: float = 260.0
    fy: float = 260.0
    cx: float = 159.5
    cy: float = 119.5
    depth_factor: float = 1000.0
    image_scale: float = 1.0
    width: int = 320
    height: int = 240

    def to_camera(self) -> CameraModel:
        return CameraModel(**self.model_dump())


class SecondPassSpec(_SpecModel):
    """Rigid offset of the second-pass trajectory (world frame)."""

    translation: Vector3 = (0.1, 0.0, 0.05)
    yaw_deg: float = 5.0


class SceneSpec(_SpecModel):
    """Complete description of a synthetic sequence."""

    seed: int = Field(default=0, ge=0)
    noise_seed: int | None = Field(
        default=None, ge=0, description="Seed of the sensor noise streams; defaults to seed"
    )
    n_frames: int = Field(default=30, ge=2)
    n_background_points: int = Field(default=1000, ge=0)
    objects: list[ObjectSpec] = Field(default_factory=list)
    trajectory: TrajectorySpec = Field(default_factory=TrajectorySpec)
    camera: CameraSpec = Field(default_factory=CameraSpec)
    room: RoomSpec = Field(default_factory=RoomSpec)
    feature_noise_px: float = Field(default=0.0, ge=0.0)
    depth_noise: float = Field(default=0.0, ge=0.0)
    frame_rate: float = Field(default=15.0, gt=0.0)
    descriptor_bytes: int = Field(default=32, ge=1, le=255)
    second_pass: SecondPassSpec = Field(default_factory=SecondPassSpec)

    @model_validator(mode="after")
    def _trajectory_length(self) -> SceneSpec:
        if self.trajectory.kind == "poses":
            assert self.trajectory.poses is not None
            if len(self.trajectory.poses) != self.n_frames:
                raise ValueError("trajectory poses must list one pose per frame")
        return self

    @property
    def cam(self) -> CameraModel:
        try:
            return self.camera.to_camera()
        except ValidationError as exc:
            raise InvalidSpec(f"invalid camera: {exc}") from exc

    @property
    def has_relocated_objects(self) -> bool:
        return any(isinstance(o.motion, RelocatedBetweenPasses) for o in self.objects)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> SceneSpec:
        """Validate a raw mapping.

        Raises:
            InvalidSpec: If the mapping does not describe a valid scene.
        """

        try:
            return cls.model_validate(dict(data))
        except PydanticValidationError as exc:
            raise InvalidSpec(f"invalid scene spec: {exc}") from exc


def load_scene_spec(path: Path) -> SceneSpec:
    """Read a scene spec from ``.yaml``/``.yml`` or ``.toml``.

    Raises:
        InvalidSpec: If the file is missing, unparsable or invalid.
    """

    if not path.exists():
        raise InvalidSpec(f"scene spec not found: {path}")
    try:
        if path.suffix == ".toml":
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        else:
            with path.open("r", encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
    except (yaml.YAMLError, tomllib.TOMLDecodeError) as exc:
        raise InvalidSpec(f"cannot parse scene spec {path}: {exc}") from exc
    logger.info("Loaded scene spec from %s", path)
    return SceneSpec.from_mapping(data)


def dump_scene_spec(spec: SceneSpec, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        yaml.safe_dump(spec.model_dump(mode="json"), fh, sort_keys=False)
