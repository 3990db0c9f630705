"""Pose-guided propagation and repair of instance masks.

Regions of the previous (refined) frame are warped into the current frame
through depth and the relative camera motion. Each warped region is matched
against the coarse regions of the current frame: a match that has grown past
the warped outline is replaced by the warped mask, and an unmatched warped
region is added when the current frame lost regions. The warp follows the
camera only, so regions of moving instances are left as segmented.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from ..exceptions import DimensionMismatch, EmptyProjection, ZeroDepth
from ..geometry import CameraModel, Pose, back_project_array, project_array
from .morphology import close_mask, dilate_mask
from .regions import FrameSegmentation, MotionState, SegmentedRegion
from .similarity import SimilarityWeights, find_match

logger = logging.getLogger(__name__)

# Pixels around the warped outline an overgrown region may reach into.
OUTLINE_BAND_PX = 3
# Share of an overgrown region allowed outside that band.
STRAY_SHARE = 0.01


def project_region(
    region: SegmentedRegion,
    depth: NDArray[np.integer],
    cam: CameraModel,
    rel: Pose,
) -> SegmentedRegion:
    """Warp a region into another view through its depth and ``rel``.

    Pixels without depth are skipped; warped pixels are rounded to the nearest
    cell, those landing outside the frame are dropped, and a 3x3 closing fills
    forward-warping holes.

    Raises:
        DimensionMismatch: If the depth grid and mask differ in size.
        EmptyProjection: If no pixel lands inside the frame.
    """

    depth = np.asarray(depth)
    if depth.shape != region.mask.shape:
        raise DimensionMismatch(
            f"depth grid {depth.shape} does not match mask {region.mask.shape}"
        )
    if region.mask.shape != cam.shape:
        raise DimensionMismatch(
            f"mask {region.mask.shape} does not match camera {cam.shape}"
        )

    rows, cols = np.nonzero(region.mask)
    raw = depth[rows, cols].astype(np.float64)
    valid = raw > 0
    if not np.any(valid):
        raise EmptyProjection(f"region {region.instance_id} has no valid depth")

    pixels = np.column_stack([cols[valid], rows[valid]]).astype(np.float64)
    try:
        points = back_project_array(cam, pixels, raw[valid])
    except ZeroDepth as exc:  # pragma: no cover - filtered above
        raise EmptyProjection(str(exc)) from exc

    uv, _ = project_array(cam, rel, points)
    inside = cam.contains(uv)
    if not np.any(inside):
        raise EmptyProjection(f"region {region.instance_id} left the view")

    new_cols, new_rows = cam.pixel_cells(uv[inside])
    warped = np.zeros(cam.shape, dtype=bool)
    warped[new_rows, new_cols] = True
    dropped = int(np.count_nonzero(~inside))
    if dropped:
        logger.debug(
            "Region %d: %d warped pixels fell outside the frame",
            region.instance_id,
            dropped,
        )
    return region.with_mask(close_mask(warped))


def is_overgrown(current: SegmentedRegion, projected: SegmentedRegion) -> bool:
    """Whether ``current`` is ``projected`` grown past its outline.

    The overlap ratio on the current side must be the smaller one, the
    surplus area must exceed a one-pixel ring around ``projected`` and almost
    all of ``current`` must lie within ``OUTLINE_BAND_PX`` of ``projected``.
    A warped mask that merely lost a few boundary pixels, or a region that
    extends well beyond the warp, is not overgrown.
    """

    intersection = int(np.count_nonzero(current.mask & projected.mask))
    if intersection == 0 or intersection / current.area >= intersection / projected.area:
        return False
    ring = int(np.count_nonzero(dilate_mask(projected.mask, 3) & ~projected.mask))
    if current.area - projected.area <= ring:
        return False
    band = dilate_mask(projected.mask, 2 * OUTLINE_BAND_PX + 1)
    stray = int(np.count_nonzero(current.mask & ~band))
    return stray <= STRAY_SHARE * current.area


def refine(
    prev: FrameSegmentation,
    prev_depth: NDArray[np.integer],
    cur_coarse: FrameSegmentation,
    rel: Pose,
    cam: CameraModel,
    w: SimilarityWeights,
) -> FrameSegmentation:
    """Repair the coarse segmentation of the current frame.

    Warped previous regions are processed in ascending instance id; each
    current region can be claimed by at most one of them. A matched current
    region keeps its identity but takes the warped mask when it is overgrown
    (see :func:`is_overgrown`). Previous regions judged Moving claim their
    match but never replace or add masks. An unmatched warped region is added only when
    the previous frame had more regions than the current one, and at most
    that difference many are added. Overlaps left over are given to the
    region with the nearest barycenter.

    Raises:
        DimensionMismatch: If frames, depth grid and camera disagree in size.
    """

    if prev.shape != cur_coarse.shape:
        raise DimensionMismatch(
            f"previous frame {prev.shape} and current frame {cur_coarse.shape} differ"
        )
    if np.asarray(prev_depth).shape != prev.shape or cam.shape != prev.shape:
        raise DimensionMismatch("depth grid or camera size does not match the frames")

    diag = math.hypot(cur_coarse.width, cur_coarse.height)
    available = list(cur_coarse.regions)
    output: dict[int, SegmentedRegion] = {r.instance_id: r for r in cur_coarse.regions}
    allow_additions = len(prev.regions) > len(cur_coarse.regions)
    addition_budget = len(prev.regions) - len(cur_coarse.regions)
    used_ids = {r.instance_id for r in cur_coarse.regions} | {
        r.instance_id for r in prev.regions
    }
    next_id = max(used_ids, default=-1) + 1

    for previous in prev.regions:
        try:
            projected = project_region(previous, prev_depth, cam, rel)
        except EmptyProjection as exc:
            logger.debug("Frame %d: %s", cur_coarse.frame_index, exc)
            continue

        match = find_match(projected, available, w, diag)
        moving = previous.motion_state is MotionState.MOVING
        if match is not None:
            current = match.region
            available.remove(current)
            if not moving and is_overgrown(current, projected):
                output[current.instance_id] = current.with_attributes(
                    mask=projected.mask, confidence=1.0
                )
            continue

        if moving:
            logger.debug(
                "Frame %d: moving region %d not carried over",
                cur_coarse.frame_index,
                previous.instance_id,
            )
            continue
        if allow_additions and addition_budget > 0:
            if previous.instance_id in output:
                new_id = next_id
                next_id += 1
            else:
                new_id = previous.instance_id
            output[new_id] = projected.with_attributes(
                instance_id=new_id, confidence=1.0, motion_state=None
            )
            addition_budget -= 1

    regions = sorted(output.values(), key=lambda r: r.instance_id)
    resolved = resolve_overlaps(regions)
    return FrameSegmentation(
        cur_coarse.frame_index, tuple(resolved), cur_coarse.width, cur_coarse.height
    )


def resolve_overlaps(regions: list[SegmentedRegion]) -> list[SegmentedRegion]:
    """Assign each contested pixel to the claimant with the nearest barycenter.

    Equal distances go to the lower instance id. Regions left empty are dropped.
    """

    if len(regions) < 2:
        return list(regions)
    stack = np.stack([r.mask for r in regions])
    contested = stack.sum(axis=0) > 1
    if not np.any(contested):
        return list(regions)

    rows, cols = np.nonzero(contested)
    centers = np.array([r.barycenter for r in regions])
    d2 = (cols[:, None] - centers[None, :, 0]) ** 2 + (
        rows[:, None] - centers[None, :, 1]
    ) ** 2
    claims = stack[:, rows, cols].T
    winner = np.argmin(np.where(claims, d2, np.inf), axis=1)
    logger.debug("Reassigned %d contested pixels", rows.size)

    resolved = []
    for k, region in enumerate(regions):
        mask = region.mask.copy()
        mask[rows, cols] = winner == k
        if not mask.any():
            logger.debug("Region %d lost every pixel to overlaps", region.instance_id)
            continue
        resolved.append(region.with_mask(mask))
    return resolved
