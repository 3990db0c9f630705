"""Plain ``key=value`` camera files (``camera.cfg``).

Example::

    # sensor
    fx = 260.0
    fy = 260.0
    cx = 159.5
    cy = 119.5
    depth_factor = 1000
    width = 320
    height = 240
    # optional tracking thresholds for this sensor
    huber_delta = 2.0

Camera keys build the :class:`CameraModel`; any :class:`TrackingConfig`
field may also appear and becomes a dataset-level tracking default.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..exceptions import ConfigurationError, ValidationError
from ..geometry import CameraModel
from ..tracking import TrackingConfig

logger = logging.getLogger(__name__)

CAMERA_KEYS = ("fx", "fy", "cx", "cy", "depth_factor", "image_scale", "width", "height")
INTEGER_KEYS = frozenset({"width", "height", "descriptor_bytes"})
EXTRA_KEYS = ("descriptor_bytes",)
DEFAULT_DESCRIPTOR_BYTES = 32


@dataclass(frozen=True)
class CameraFile:
    camera: CameraModel
    tracking_overrides: Mapping[str, str] = field(default_factory=dict)
    descriptor_bytes: int = DEFAULT_DESCRIPTOR_BYTES


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    """Split ``key=value`` lines; ``#`` starts a comment.

    Raises:
        ConfigurationError: On a line without ``=`` or a repeated key.
    """

    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigurationError(f"{source}:{number}: expected key=value, got {raw!r}")
        if key in values:
            raise ConfigurationError(f"{source}:{number}: duplicate key {key!r}")
        values[key] = value
    return values


def _convert(key: str, value: str, source: str) -> Any:
    try:
        return int(value) if key in INTEGER_KEYS else float(value)
    except ValueError as exc:
        raise ConfigurationError(f"{source}: {key} must be numeric, got {value!r}") from exc


def camera_file_from_text(text: str, source: str = "<string>") -> CameraFile:
    """Parse ``camera.cfg`` content.

    Raises:
        ConfigurationError: On unknown keys, malformed lines, bad values or
            missing intrinsics.
    """

    values = parse_key_values(text, source)
    tracking_keys = set(TrackingConfig.model_fields)
    unknown = set(values) - set(CAMERA_KEYS) - tracking_keys - set(EXTRA_KEYS)
    if unknown:
        raise ConfigurationError(f"{source}: unknown keys {sorted(unknown)}")

    camera_values = {k: _convert(k, v, source) for k, v in values.items() if k in CAMERA_KEYS}
    try:
        camera = CameraModel.from_mapping(camera_values)
    except ValidationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc

    overrides = {k: v for k, v in values.items() if k in tracking_keys}
    try:
        TrackingConfig.model_validate(overrides)
    except ValueError as exc:
        raise ConfigurationError(f"{source}: invalid tracking value: {exc}") from exc

    descriptor_bytes = int(
        _convert("descriptor_bytes", values.get("descriptor_bytes", str(DEFAULT_DESCRIPTOR_BYTES)), source)
    )
    return CameraFile(camera, overrides, descriptor_bytes)


def read_camera_file(path: Path) -> CameraFile:
    if not path.exists():
        raise ConfigurationError(f"camera file not found: {path}")
    camera_file = camera_file_from_text(path.read_text(encoding="utf-8"), str(path))
    logger.debug("Loaded camera intrinsics from %s", path)
    return camera_file


def write_camera_file(
    path: Path,
    camera: CameraModel,
    *,
    descriptor_bytes: int = DEFAULT_DESCRIPTOR_BYTES,
    tracking_overrides: Mapping[str, Any] | None = None,
) -> None:
    lines = ["# camera intrinsics"]
    for key, value in camera.to_mapping().items():
        lines.append(f"{key} = {value!r}")
    lines.append(f"descriptor_bytes = {descriptor_bytes}")
    if tracking_overrides:
        lines.append("# tracking")
        lines.extend(f"{key} = {value}" for key, value in tracking_overrides.items())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
