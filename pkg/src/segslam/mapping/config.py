"""Map maintenance settings."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from .maps import DEFAULT_MERGE_RADIUS


class MappingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    merge_radius: float = Field(
        default=DEFAULT_MERGE_RADIUS, gt=0.0, description="Meters; closer points are merged"
    )
    keyframe_interval: int = Field(
        default=5, ge=1, description="Every n-th frame updates the maps"
    )
    static_frames: int = Field(
        default=3,
        ge=1,
        description="Consecutive Static verdicts before an instance's points are mapped",
    )
