import numpy as np
import pytest

from config.pipeline_config import Config
from geometry.camera import backproject
from geometry.pose import Pose
from segmentation.centroid import CentroidSource, compute_centroid
from segmentation.detection_filter import filter_detections

from conftest import box_mask, make_detection


def _depth(intrinsics, meters):
    return np.full(intrinsics.shape, int(round(meters * intrinsics.depth_scale)), dtype=np.uint16)


class TestFilter:
    def test_keeps_confident_dynamic_detections_sorted_by_score(self, intrinsics):
        shape = intrinsics.shape
        detections = [
            make_detection(box_mask(shape, 0, 0, 10, 10), "person", 0.92),
            make_detection(box_mask(shape, 0, 20, 10, 10), "tv", 0.99),
            make_detection(box_mask(shape, 0, 40, 10, 10), "chair", 0.97),
            make_detection(box_mask(shape, 0, 60, 10, 10), "bottle", 0.5),
        ]
        kept = filter_detections(detections, Config())
        assert [d.class_name for d in kept] == ["chair", "person"]

    def test_threshold_is_inclusive(self, intrinsics):
        det = make_detection(box_mask(intrinsics.shape, 0, 0, 5, 5), "person", 0.9)
        assert filter_detections([det], Config(score_threshold=0.9)) == [det]

    def test_class_set_is_configurable(self, intrinsics):
        det = make_detection(box_mask(intrinsics.shape, 0, 0, 5, 5), "tv", 0.99)
        assert filter_detections([det], Config(dynamic_classes=("tv",))) == [det]


class TestCentroid:
    def test_uses_depth_at_the_box_center(self, intrinsics):
        mask = box_mask(intrinsics.shape, 100, 150, 20, 20)
        det = make_detection(mask)
        centroid = compute_centroid(det, _depth(intrinsics, 2.0), intrinsics, Pose.identity())
        assert centroid.valid
        assert centroid.source == CentroidSource.BBOX_CENTER_DEPTH
        assert centroid.position == pytest.approx(backproject((160.0, 110.0), 2.0, intrinsics))

    def test_is_moved_to_the_world_frame(self, intrinsics):
        det = make_detection(box_mask(intrinsics.shape, 100, 150, 20, 20))
        shifted = Pose([0.0, 0.0, 0.0, 1.0], [1.0, -2.0, 0.5])
        centroid = compute_centroid(det, _depth(intrinsics, 2.0), intrinsics, shifted)
        expected = backproject((160.0, 110.0), 2.0, intrinsics) + np.array([1.0, -2.0, 0.5])
        assert centroid.position == pytest.approx(expected)

    def test_hole_at_the_center_falls_back_to_the_mask_median(self, intrinsics):
        det = make_detection(box_mask(intrinsics.shape, 100, 150, 20, 20))
        depth = _depth(intrinsics, 3.0)
        depth[110, 160] = 0
        centroid = compute_centroid(det, depth, intrinsics, Pose.identity())
        assert centroid.source == CentroidSource.MASK_MEDIAN_DEPTH
        assert centroid.depth == pytest.approx(3.0)

    def test_outlier_center_depth_is_replaced(self, intrinsics):
        det = make_detection(box_mask(intrinsics.shape, 100, 150, 20, 20))
        depth = _depth(intrinsics, 2.0)
        depth[110, 160] = 8 * intrinsics.depth_scale
        centroid = compute_centroid(det, depth, intrinsics, Pose.identity())
        assert centroid.source == CentroidSource.MASK_MEDIAN_DEPTH
        assert centroid.depth == pytest.approx(2.0)

    def test_no_depth_at_all_is_invalid(self, intrinsics):
        det = make_detection(box_mask(intrinsics.shape, 100, 150, 20, 20))
        centroid = compute_centroid(det, np.zeros(intrinsics.shape, dtype=np.uint16), intrinsics, Pose.identity())
        assert not centroid.valid
        assert centroid.source == CentroidSource.NONE
