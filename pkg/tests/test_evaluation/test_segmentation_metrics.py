"""Tests for mIoU and mAP@0.5."""

import numpy as np
import pytest

from segslam.exceptions import DimensionMismatch
from segslam.evaluation import (
    average_precision,
    class_iou,
    map50,
    miou,
    segmentation_report,
)
from segslam.segmentation import FrameSegmentation, SegmentedRegion

SHAPE = (20, 20)


def block(top, left, height, width, instance_id=0, class_id=0, confidence=1.0):
    mask = np.zeros(SHAPE, dtype=bool)
    mask[top : top + height, left : left + width] = True
    return SegmentedRegion(instance_id, class_id, mask, confidence=confidence)


def frame(*regions, index=0):
    return FrameSegmentation(index, regions, SHAPE[1], SHAPE[0])


class TestAveragePrecision:
    def test_perfect_curve(self) -> None:
        assert average_precision(np.array([0.5, 1.0]), np.array([1.0, 1.0])) == pytest.approx(1.0)

    def test_false_positive_first(self) -> None:
        assert average_precision(np.array([0.0, 1.0]), np.array([0.0, 0.5])) == pytest.approx(0.5)

    def test_envelope_lifts_earlier_precision(self) -> None:
        recall = np.array([0.5, 0.5, 1.0])
        precision = np.array([1.0, 0.5, 2.0 / 3.0])
        assert average_precision(recall, precision) == pytest.approx(0.5 + 0.5 * 2.0 / 3.0)


class TestSegmentationScores:
    """Test scores on hand-built frames."""

    def test_ground_truth_scores_one(self, static_bundle) -> None:
        gt = [f.segmentation for f in static_bundle.frames]
        assert miou(gt, gt) == pytest.approx(1.0)
        assert map50(gt, gt) == pytest.approx(1.0)

    def test_empty_predictions_score_zero(self, static_bundle) -> None:
        gt = [f.segmentation for f in static_bundle.frames]
        empty = [FrameSegmentation.empty(g.frame_index, g.width, g.height) for g in gt]
        assert miou(empty, gt) == 0.0
        assert map50(empty, gt) == 0.0

    def test_nothing_to_find(self) -> None:
        assert miou([frame()], [frame()]) == 1.0
        assert map50([frame()], [frame()]) == 1.0
        assert miou([frame(block(0, 0, 4, 4))], [frame()]) == 0.0
        assert map50([frame(block(0, 0, 4, 4))], [frame()]) == 0.0

    def test_half_shifted_prediction(self) -> None:
        gt = [frame(block(0, 0, 10, 10))]
        pred = [frame(block(0, 5, 10, 10))]
        assert class_iou(pred, gt) == {0: pytest.approx(50 / 150)}
        assert map50(pred, gt) == 0.0

    def test_confident_false_positive_halves_ap(self) -> None:
        gt = [frame(block(0, 0, 10, 10))]
        pred = [
            frame(
                block(0, 0, 10, 10, instance_id=0, confidence=0.9),
                block(12, 12, 4, 4, instance_id=1, confidence=0.95),
            )
        ]
        assert map50(pred, gt) == pytest.approx(0.5)
        assert miou(pred, gt) == pytest.approx(100 / 116)

    def test_one_of_two_instances_found(self) -> None:
        gt = [frame(block(0, 0, 8, 8, 0), block(10, 10, 8, 8, 1))]
        pred = [frame(block(0, 0, 8, 8, 0))]
        assert map50(pred, gt) == pytest.approx(0.5)

    def test_wrong_class_does_not_count(self) -> None:
        gt = [frame(block(0, 0, 10, 10, class_id=0))]
        pred = [frame(block(0, 0, 10, 10, class_id=56))]
        assert miou(pred, gt) == 0.0
        assert map50(pred, gt) == 0.0

    def test_matches_stay_within_their_frame(self) -> None:
        gt = [frame(block(0, 0, 10, 10), index=0), frame(index=1)]
        pred = [frame(index=0), frame(block(0, 0, 10, 10), index=1)]
        assert map50(pred, gt) == 0.0

    def test_report_breakdown(self) -> None:
        gt = [frame(block(0, 0, 10, 10, 0, 0), block(12, 12, 6, 6, 1, 56))]
        pred = [frame(block(0, 0, 10, 10, 0, 0))]
        report = segmentation_report(pred, gt)
        assert set(report.per_class) == {0, 56}
        assert report.per_class[0].iou == pytest.approx(1.0)
        assert report.per_class[0].ap == pytest.approx(1.0)
        assert report.per_class[56].gt_instances == 1
        assert report.per_class[56].predictions == 0
        assert report.miou == pytest.approx(0.5)
        assert report.map50 == pytest.approx(0.5)

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(DimensionMismatch):
            miou([frame()], [frame(), frame(index=1)])
        with pytest.raises(DimensionMismatch):
            map50([FrameSegmentation.empty(0, 10, 10)], [frame()])
