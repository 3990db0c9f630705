"""Seeded degradation of ground-truth masks.

Stands in for an imperfect instance segmenter: regions go missing or grow past
their true outline.
"""

from __future__ import annotations

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import ValidationError
from .morphology import dilate_mask
from .regions import FrameSegmentation

logger = logging.getLogger(__name__)

DILATION_KERNEL = 5


class CorruptionConfig(BaseModel):
    """Parameters of :func:`corrupt`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    drop_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    dilate_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)


def corrupt(
    seg: FrameSegmentation, drop_rate: float, dilate_rate: float, seed: int
) -> FrameSegmentation:
    """Drop and dilate regions at random, reproducibly per ``(seed, frame)``.

    Two uniform variates are drawn per region in instance-id order: the first
    decides the drop, the second the 5x5 dilation. A dilated region only
    claims pixels that belong to no other surviving region.
    """

    if not (0.0 <= drop_rate <= 1.0 and 0.0 <= dilate_rate <= 1.0):
        raise ValidationError("corruption rates must lie in [0, 1]")
    if seed < 0:
        raise ValidationError("corruption seed must be non-negative")

    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, max(seg.frame_index, 0)]))
    )
    draws = rng.random((len(seg.regions), 2))
    survivors = []
    for region, (drop_draw, dilate_draw) in zip(seg.regions, draws):
        if drop_draw < drop_rate:
            logger.debug("Frame %d: dropped region %d", seg.frame_index, region.instance_id)
            continue
        survivors.append((region, dilate_draw < dilate_rate))

    occupied = np.zeros(seg.shape, dtype=bool)
    for region, _ in survivors:
        occupied |= region.mask

    kept = []
    for region, dilate in survivors:
        if dilate:
            grown = region.mask | (dilate_mask(region.mask, DILATION_KERNEL) & ~occupied)
            occupied |= grown
            region = region.with_mask(grown)
        kept.append(region)
    return seg.with_regions(kept)
