"""Semantic (mIoU) and instance (mAP at IoU 0.5) segmentation scores."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..exceptions import DimensionMismatch
from ..segmentation import FrameSegmentation

logger = logging.getLogger(__name__)

IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class ClassScore:
    iou: float
    ap: float
    gt_instances: int
    predictions: int


@dataclass(frozen=True)
class SegReport:
    miou: float
    map50: float
    per_class: Mapping[int, ClassScore] = field(default_factory=dict)


def _check_sequences(
    pred: Sequence[FrameSegmentation], gt: Sequence[FrameSegmentation]
) -> None:
    if len(pred) != len(gt):
        raise DimensionMismatch(f"{len(pred)} predicted frames for {len(gt)} ground-truth frames")
    for p, g in zip(pred, gt):
        if p.shape != g.shape:
            raise DimensionMismatch(
                f"frame {g.frame_index}: prediction {p.shape} vs ground truth {g.shape}"
            )


def _gt_classes(gt: Sequence[FrameSegmentation]) -> list[int]:
    return sorted(set().union(*(g.class_ids for g in gt))) if gt else []


def class_iou(
    pred: Sequence[FrameSegmentation], gt: Sequence[FrameSegmentation]
) -> dict[int, float]:
    """IoU per ground-truth class, pixel counts summed over all frames."""

    _check_sequences(pred, gt)
    scores = {}
    for class_id in _gt_classes(gt):
        intersection = union = 0
        for p, g in zip(pred, gt):
            pm = p.class_mask(class_id)
            gm = g.class_mask(class_id)
            intersection += int(np.count_nonzero(pm & gm))
            union += int(np.count_nonzero(pm | gm))
        scores[class_id] = intersection / union if union else 0.0
    return scores


def miou(pred: Sequence[FrameSegmentation], gt: Sequence[FrameSegmentation]) -> float:
    """Mean IoU over the classes present in the ground truth.

    Without any ground-truth class the score is 1.0 when nothing is
    predicted either, else 0.0.

    Raises:
        DimensionMismatch: If frame counts or image sizes differ.
    """

    scores = class_iou(pred, gt)
    if not scores:
        return 1.0 if all(len(p) == 0 for p in pred) else 0.0
    return float(np.mean(list(scores.values())))


def average_precision(recall: np.ndarray, precision: np.ndarray) -> float:
    """Area under the precision envelope (all-point interpolation)."""

    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    mpre = np.flip(np.maximum.accumulate(np.flip(mpre)))
    steps = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def _class_ap(
    pred: Sequence[FrameSegmentation], gt: Sequence[FrameSegmentation], class_id: int
) -> tuple[float, int, int]:
    gt_masks = {
        k: [r.mask for r in g.regions if r.class_id == class_id] for k, g in enumerate(gt)
    }
    n_gt = sum(len(masks) for masks in gt_masks.values())
    detections = [
        (-r.confidence, k, r.instance_id, r.mask)
        for k, p in enumerate(pred)
        for r in p.regions
        if r.class_id == class_id
    ]
    detections.sort(key=lambda d: (d[0], d[1], d[2]))
    if n_gt == 0:
        return 0.0, 0, len(detections)

    taken = {k: np.zeros(len(masks), dtype=bool) for k, masks in gt_masks.items()}
    hits = np.zeros(len(detections))
    for d, (_, k, _, mask) in enumerate(detections):
        best, best_iou = -1, -1.0
        for j, gm in enumerate(gt_masks[k]):
            if taken[k][j]:
                continue
            union = np.count_nonzero(mask | gm)
            iou = np.count_nonzero(mask & gm) / union if union else 0.0
            if iou > best_iou:
                best, best_iou = j, iou
        if best >= 0 and best_iou >= IOU_THRESHOLD:
            taken[k][best] = True
            hits[d] = 1.0

    if not detections:
        return 0.0, n_gt, 0
    tp = np.cumsum(hits)
    fp = np.cumsum(1.0 - hits)
    recall = tp / n_gt
    precision = tp / (tp + fp)
    return average_precision(recall, precision), n_gt, len(detections)


def map50(pred: Sequence[FrameSegmentation], gt: Sequence[FrameSegmentation]) -> float:
    """Mean over ground-truth classes of instance AP at IoU 0.5.

    Predictions are visited by decreasing confidence; each claims the
    unmatched same-frame, same-class ground-truth instance of highest IoU.

    Raises:
        DimensionMismatch: If frame counts or image sizes differ.
    """

    _check_sequences(pred, gt)
    classes = _gt_classes(gt)
    if not classes:
        return 1.0 if all(len(p) == 0 for p in pred) else 0.0
    return float(np.mean([_class_ap(pred, gt, c)[0] for c in classes]))


def segmentation_report(
    pred: Sequence[FrameSegmentation], gt: Sequence[FrameSegmentation]
) -> SegReport:
    """mIoU, mAP@0.5 and the per-class breakdown of both."""

    ious = class_iou(pred, gt)
    per_class = {}
    for class_id, iou in ious.items():
        ap, n_gt, n_pred = _class_ap(pred, gt, class_id)
        per_class[class_id] = ClassScore(iou=iou, ap=ap, gt_instances=n_gt, predictions=n_pred)
    report = SegReport(miou=miou(pred, gt), map50=map50(pred, gt), per_class=per_class)
    logger.debug("Segmentation: mIoU %.4f, mAP@0.5 %.4f", report.miou, report.map50)
    return report
