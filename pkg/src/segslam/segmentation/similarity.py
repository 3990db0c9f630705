"""Region similarity score and best-match search.

The score of two regions combines the distance between their barycenters,
normalised by the image diagonal, with the square root of the fraction of
their pixels that disagree:

    S = w1 * Dist / diag + w2 * sqrt(|A xor B| / (|A| + |B|))

Lower is more similar; identical regions score 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import DimensionMismatch, EmptyRegion
from .regions import SegmentedRegion

logger = logging.getLogger(__name__)


class SimilarityWeights(BaseModel):
    """Weights and acceptance threshold of the region similarity score."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w1: float = Field(default=0.5, ge=0.0, description="Barycenter distance weight")
    w2: float = Field(default=0.5, ge=0.0, description="Shape disagreement weight")
    match_threshold: float = Field(
        default=0.4, gt=0.0, description="Maximum score accepted as a match"
    )

    @model_validator(mode="after")
    def _check_weights(self) -> SimilarityWeights:
        if self.w1 + self.w2 <= 0:
            raise ValueError("w1 + w2 must be > 0")
        return self


@dataclass(frozen=True)
class RegionMatch:
    region: SegmentedRegion
    score: float


def region_similarity(
    a: SegmentedRegion, b: SegmentedRegion, w: SimilarityWeights, diag: float
) -> float:
    """Return the similarity score of two regions (0 for identical regions).

    Raises:
        EmptyRegion: If either region has no pixels.
        DimensionMismatch: If the masks differ in shape.
    """

    if a.area == 0 or b.area == 0:
        raise EmptyRegion("similarity requires non-empty regions")
    if a.mask.shape != b.mask.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.mask.shape} vs {b.mask.shape}")

    (ua, va), (ub, vb) = a.barycenter, b.barycenter
    distance = math.hypot(ua - ub, va - vb)
    disagreement = int(np.count_nonzero(a.mask ^ b.mask))
    shape_term = math.sqrt(disagreement / (a.area + b.area))
    return w.w1 * (distance / diag) + w.w2 * shape_term


def find_match(
    target: SegmentedRegion,
    candidates: Sequence[SegmentedRegion],
    w: SimilarityWeights,
    diag: float | None = None,
) -> RegionMatch | None:
    """Return the lowest-scoring candidate if its score is below the threshold.

    Equal scores resolve to the lowest instance id. ``diag`` defaults to the
    diagonal of the target mask.
    """

    if not candidates:
        return None
    if diag is None:
        height, width = target.mask.shape
        diag = math.hypot(width, height)

    best: tuple[float, int, SegmentedRegion] | None = None
    for candidate in candidates:
        score = region_similarity(target, candidate, w, diag)
        key = (score, candidate.instance_id)
        if best is None or key < best[:2]:
            best = (score, candidate.instance_id, candidate)

    assert best is not None
    score, _, region = best
    if score < w.match_threshold:
        return RegionMatch(region=region, score=score)
    return None
