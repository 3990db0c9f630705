"""Tracking thresholds and solver settings."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class TrackingConfig(BaseModel):
    """Thresholds for motion judgment, association and the pose solver."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    match_dist_3d: float = Field(
        default=0.05, gt=0.0, description="Meters; a matched point farther than this moved"
    )
    moving_fraction: float = Field(
        default=0.2, gt=0.0, le=1.0, description="Share of moved points marking an instance moving"
    )
    huber_delta: float = Field(default=2.0, gt=0.0, description="Huber threshold in pixels")
    max_iterations: int = Field(default=20, gt=0)
    convergence_tol: float = Field(default=1e-8, gt=0.0)
    pixel_match_radius: float = Field(
        default=8.0, gt=0.0, description="Pixels around a feature searched for map points"
    )
    max_descriptor_distance: int = Field(
        default=50, ge=0, description="Largest accepted Hamming distance in bits"
    )
    min_correspondences: int = Field(default=6, ge=6)
