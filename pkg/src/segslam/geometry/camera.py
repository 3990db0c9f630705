"""Pinhole camera model with depth factor and image scale.

Pixel centres sit at integer coordinates: a continuous pixel ``(u, v)`` falls
in the cell ``(floor(u + 0.5), floor(v + 0.5))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus raw-depth conversion.

    Attributes:
        fx, fy: Focal lengths in pixels.
        cx, cy: Principal point in pixels.
        depth_factor: Raw depth units per meter.
        image_scale: Homogeneous scale divisor applied at projection.
        width, height: Image size in pixels.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    depth_factor: float = 1000.0
    image_scale: float = 1.0
    width: int = 640
    height: int = 480

    def __post_init__(self) -> None:
        for name in ("fx", "fy", "cx", "cy", "depth_factor", "image_scale"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError("focal lengths must be > 0")
        if self.depth_factor <= 0:
            raise ValidationError("depth_factor must be > 0")
        if self.image_scale <= 0:
            raise ValidationError("image_scale must be > 0")
        if int(self.width) <= 0 or int(self.height) <= 0:
            raise ValidationError("image size must be positive")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        if not 0 <= self.cx < self.width:
            raise ValidationError(f"cx={self.cx} outside [0, {self.width})")
        if not 0 <= self.cy < self.height:
            raise ValidationError(f"cy={self.cy} outside [0, {self.height})")

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    @property
    def intrinsic_matrix(self) -> NDArray[np.float64]:
        """Return the 3x3 intrinsic matrix K."""

        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def diagonal(self) -> float:
        """Image diagonal in pixels."""

        return math.hypot(self.width, self.height)

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(height, width)`` of images taken by this camera."""

        return (self.height, self.width)

    def pixel_cells(
        self, uv: NDArray[np.float64]
    ) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """Return integer ``(cols, rows)`` cells for continuous pixels."""

        uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        cols = np.floor(uv[:, 0] + 0.5).astype(np.int64)
        rows = np.floor(uv[:, 1] + 0.5).astype(np.int64)
        return cols, rows

    def contains(self, uv: NDArray[np.float64]) -> NDArray[np.bool_]:
        """Return which continuous pixels fall inside the image grid."""

        uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        finite = np.isfinite(uv).all(axis=1)
        cols, rows = self.pixel_cells(np.where(finite[:, None], uv, -1.0))
        return (
            finite
            & (cols >= 0)
            & (cols < self.width)
            & (rows >= 0)
            & (rows < self.height)
        )

    def to_mapping(self) -> dict[str, Any]:
        """Return intrinsics as a plain mapping."""

        return asdict(self)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> CameraModel:
        """Build a camera from a mapping of intrinsic values.

        Raises:
            ValidationError: If a required key is missing or a value is invalid.
        """

        required = ("fx", "fy", "cx", "cy")
        missing = [key for key in required if key not in values]
        if missing:
            raise ValidationError(f"camera intrinsics missing keys: {missing}")
        try:
            return cls(
                fx=float(values["fx"]),
                fy=float(values["fy"]),
                cx=float(values["cx"]),
                cy=float(values["cy"]),
                depth_factor=float(values.get("depth_factor", 1000.0)),
                image_scale=float(values.get("image_scale", 1.0)),
                width=int(values.get("width", 640)),
                height=int(values.get("height", 480)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"invalid camera intrinsics: {exc}") from exc
