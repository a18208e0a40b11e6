import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from config.pipeline_config import Config
from dataset.trajectory_io import Trajectory, read_trajectory
from dataset.tum_reader import Frame, SequenceReader
from geometry.alignment import rigid_align_matrix
from geometry.pose import Pose, relative_motion, transform_points
from odometry.features import bucket_indices, detect_features, match_features, sample_depth
from odometry.frontend import (
    GroundTruthOdometry,
    OdometryEstimate,
    OdometryStatus,
    VisualOdometry,
    extrapolate_pose,
)
from odometry.pose_estimation import TrackingLostError, estimate_relative_pose
from tracking.masks import FrameMasks
from utils.health_tracker import OdometryHealthTracker

from conftest import random_pose


def _blocks(rng, shape, block=8):
    """Random grey-level blocks: every block corner is a corner candidate."""
    h, w = shape
    cells = rng.integers(0, 256, size=(h // block + 1, w // block + 1)).astype(np.uint8)
    return np.kron(cells, np.ones((block, block), dtype=np.uint8))[:h, :w]


def _frame(intrinsics, gray, timestamp, meters=2.0):
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    depth = np.full(intrinsics.shape, int(meters * intrinsics.depth_scale), dtype=np.uint16)
    return Frame(timestamp, rgb, depth, intrinsics)


class TestFeatures:
    def test_features_keep_clear_of_the_border(self, intrinsics, rng):
        gray = _blocks(rng, intrinsics.shape)
        depth = np.full(intrinsics.shape, 10000, dtype=np.uint16)
        features = detect_features(gray, depth, None, intrinsics, target_count=200)
        assert 50 <= len(features) <= 200
        pixels = np.array([f.pixel for f in features])
        assert pixels[:, 0].min() >= 29 and pixels[:, 0].max() <= intrinsics.width - 29
        assert pixels[:, 1].min() >= 29 and pixels[:, 1].max() <= intrinsics.height - 29
        assert all(f.descriptor.shape == (32,) for f in features)
        assert all(f.point_cam[2] == pytest.approx(2.0) for f in features)

    def test_masked_region_yields_no_features(self, intrinsics, rng):
        gray = _blocks(rng, intrinsics.shape)
        depth = np.full(intrinsics.shape, 10000, dtype=np.uint16)
        mask = np.zeros(intrinsics.shape, dtype=bool)
        mask[:, 160:] = True
        features = detect_features(gray, depth, mask, intrinsics)
        assert features
        assert max(f.pixel[0] for f in features) < 160 - 2

    def test_features_need_depth(self, intrinsics, rng):
        gray = _blocks(rng, intrinsics.shape)
        depth = np.zeros(intrinsics.shape, dtype=np.uint16)
        assert detect_features(gray, depth, None, intrinsics) == []

    def test_flat_image_has_no_features(self, intrinsics):
        gray = np.full(intrinsics.shape, 128, dtype=np.uint8)
        depth = np.full(intrinsics.shape, 10000, dtype=np.uint16)
        assert detect_features(gray, depth, None, intrinsics) == []

    def test_bucketing_caps_each_cell(self):
        u = np.array([10.0, 20.0, 30.0, 70.0])
        v = np.array([10.0, 20.0, 30.0, 70.0])
        response = np.array([5.0, 9.0, 7.0, 1.0])
        kept = bucket_indices(u, v, response, (100, 100), 2, 2, 4)
        assert kept.tolist() == [1, 3]

    def test_bucketing_keeps_the_strongest_overall(self):
        u = np.array([10.0, 70.0, 10.0, 70.0])
        v = np.array([10.0, 10.0, 70.0, 70.0])
        response = np.array([1.0, 4.0, 3.0, 2.0])
        assert bucket_indices(u, v, response, (100, 100), 2, 2, 2).tolist() == [1, 2]

    def test_depth_sampling(self):
        depth = np.full((4, 4), 2.0)
        assert sample_depth(depth, np.array([1.5]), np.array([1.5]))[0] == pytest.approx(2.0)
        depth[:, 2:] = 4.0
        # Across a depth edge the nearest pixel wins
        assert sample_depth(depth, np.array([1.6]), np.array([1.0]))[0] == pytest.approx(4.0)
        assert sample_depth(depth, np.array([1.4]), np.array([1.0]))[0] == pytest.approx(2.0)

    def test_shifted_image_matches_with_the_shift(self, intrinsics, rng):
        gray = _blocks(rng, intrinsics.shape)
        depth = np.full(intrinsics.shape, 10000, dtype=np.uint16)
        shifted = np.roll(gray, 5, axis=1)
        a = detect_features(gray, depth, None, intrinsics)
        b = detect_features(shifted, depth, None, intrinsics)
        matches = match_features(a, b, ratio=0.8)
        assert len(matches) >= 30
        offsets = np.array([b[m.train].pixel - a[m.query].pixel for m in matches])
        consistent = np.all(np.abs(offsets - [5.0, 0.0]) < 1.0, axis=1)
        assert consistent.mean() > 0.9

    def test_matching_nothing(self):
        assert match_features([], []) == []


class TestRelativePose:
    def test_recovers_the_transform_despite_outliers(self, rng):
        truth = random_pose(rng, max_angle_deg=15.0, max_shift=0.3)
        src = rng.uniform([-2, -1, 1], [2, 1, 4], size=(100, 3))
        dst = transform_points(truth, src)
        outliers = rng.choice(100, size=30, replace=False)
        dst[outliers] += rng.uniform(0.5, 1.0, size=(30, 3))

        result = estimate_relative_pose(src, dst, iterations=200, inlier_threshold=0.05, rng=rng)
        assert result.pose.is_close(truth, atol=1e-6)
        assert result.inlier_count == 70
        assert not result.inliers[outliers].any()

    def test_pose_is_refit_on_every_inlier_at_the_threshold(self, rng):
        truth = random_pose(rng, max_angle_deg=10.0, max_shift=0.2)
        src = rng.uniform([-2, -1, 1], [2, 1, 4], size=(100, 3))
        dst = transform_points(truth, src) + rng.normal(0.0, 0.01, size=src.shape)
        outliers = rng.choice(100, size=30, replace=False)
        dst[outliers] += rng.uniform(0.5, 1.0, size=(30, 3))

        result = estimate_relative_pose(src, dst, iterations=200, inlier_threshold=0.05, rng=rng)
        assert not result.inliers[outliers].any()
        assert result.inlier_count >= 60
        R, t = rigid_align_matrix(src[result.inliers], dst[result.inliers])
        assert result.pose.is_close(Pose.from_rotation(R, t), atol=1e-9)

    def test_too_few_points(self):
        with pytest.raises(TrackingLostError):
            estimate_relative_pose(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_collinear_points_cannot_be_located(self):
        line = np.outer(np.linspace(0.0, 1.0, 10), [1.0, 0.0, 0.0])
        with pytest.raises(TrackingLostError):
            estimate_relative_pose(line, line)

    def test_same_seed_same_answer(self, rng):
        src = rng.uniform(-1.0, 1.0, size=(40, 3))
        dst = src + rng.normal(0.0, 0.01, size=src.shape)
        first = estimate_relative_pose(src, dst, rng=np.random.default_rng(5))
        second = estimate_relative_pose(src, dst, rng=np.random.default_rng(5))
        assert np.array_equal(first.pose.matrix(), second.pose.matrix())
        assert np.array_equal(first.inliers, second.inliers)


class TestVisualOdometry:
    def test_follows_a_rendered_static_room(self, static_sequence):
        reader = SequenceReader(static_sequence)
        groundtruth = read_trajectory(reader.groundtruth_path)
        odometry = VisualOdometry(Config(), seed=0)
        empty = FrameMasks.empty(reader.intrinsics.shape)

        estimates = [odometry.track_frame(reader.read_frame(k), empty) for k in range(15)]
        assert estimates[0].keyframe
        assert estimates[0].pose.is_close(Pose.identity())
        assert all(e.status == OdometryStatus.OK for e in estimates)

        truth = relative_motion(groundtruth[0][1], groundtruth[14][1])
        assert np.linalg.norm(estimates[-1].pose.translation - truth.translation) < 0.03
        assert odometry.health.get_status_counts()["Lost"] == 0

    def test_textureless_frame_is_lost_and_predicted(self, intrinsics, rng):
        odometry = VisualOdometry(Config(), seed=0)
        empty = FrameMasks.empty(intrinsics.shape)
        first = odometry.track_frame(_frame(intrinsics, _blocks(rng, intrinsics.shape), 0.0), empty)
        assert first.status == OdometryStatus.OK

        flat = np.full(intrinsics.shape, 90, dtype=np.uint8)
        lost = odometry.track_frame(_frame(intrinsics, flat, 1 / 30), empty)
        assert lost.status == OdometryStatus.LOST
        assert lost.inlier_count == 0
        assert not lost.keyframe
        assert lost.pose.is_close(first.pose)
        last = odometry.health.history[-1]
        assert last.status == "Lost"
        assert last.timestamp == pytest.approx(1 / 30)

    def test_identical_frames_do_not_move(self, intrinsics, rng):
        odometry = VisualOdometry(Config(), seed=0)
        empty = FrameMasks.empty(intrinsics.shape)
        gray = _blocks(rng, intrinsics.shape)
        odometry.track_frame(_frame(intrinsics, gray, 0.0), empty)
        second = odometry.track_frame(_frame(intrinsics, gray, 1 / 30), empty)
        assert second.status == OdometryStatus.OK
        assert second.pose.is_close(Pose.identity(), atol=1e-6)
        assert second.inlier_count == second.tracked_feature_count

    def test_inliers_cannot_exceed_tracked_features(self):
        with pytest.raises(ValueError):
            OdometryEstimate(0.0, Pose.identity(), 5, 4, OdometryStatus.OK)


class TestPrediction:
    def test_extrapolation_continues_the_last_motion(self):
        turn = Rotation.from_euler("y", 10, degrees=True).as_quat()
        previous = (0.0, Pose.identity())
        last = (1.0, Pose(turn, [0.1, 0.0, 0.0]))
        ahead = extrapolate_pose(previous, last, 2.0)
        assert ahead.rotation_angle_deg() == pytest.approx(20.0)
        half = extrapolate_pose(previous, (1.0, Pose([0, 0, 0, 1], [0.1, 0.0, 0.0])), 1.5)
        assert half.translation == pytest.approx([0.15, 0.0, 0.0])

    def test_prediction_before_and_after_the_first_frame(self):
        odometry = GroundTruthOdometry(Trajectory(), max_dt=0.02)
        assert odometry.predict_pose(0.0).is_close(Pose.identity())

    def test_ground_truth_replay(self, intrinsics, rng):
        poses = [(0.0, Pose.identity()), (1 / 30, Pose([0, 0, 0, 1], [0.01, 0.0, 0.0]))]
        odometry = GroundTruthOdometry(Trajectory(poses), max_dt=0.02)
        empty = FrameMasks.empty(intrinsics.shape)
        gray = _blocks(rng, intrinsics.shape)
        assert odometry.predict_pose(1 / 30).translation[0] == pytest.approx(0.01)

        estimate = odometry.track_frame(_frame(intrinsics, gray, 1 / 30), empty)
        assert estimate.status == OdometryStatus.OK
        assert estimate.pose.translation[0] == pytest.approx(0.01)

        missing = odometry.track_frame(_frame(intrinsics, gray, 5.0), empty)
        assert missing.status == OdometryStatus.LOST


class TestHealth:
    def test_counts_log_and_summary(self, tmp_path):
        health = OdometryHealthTracker()
        health.record_result(0.0, "Ok", 100, 120)
        health.record_result(0.1, "Degraded", 10, 30)
        health.record_result(0.2, "Lost", 0, 2)
        health.record_result(0.3, "Ok", 90, 100)
        assert health.get_status_counts() == {"Ok": 2, "Degraded": 1, "Lost": 1}
        lines = health.write_log(tmp_path / "health.txt").read_text().splitlines()
        assert lines[1] == "0.100000 Degraded 10 30"
        summary = health.write_summary(tmp_path / "summary.txt").read_text().splitlines()
        assert any(line.startswith("Ok") and line.endswith("50.0%") for line in summary)
        assert any(line.startswith("Lost") and line.endswith("25.0%") for line in summary)
        assert summary[-1].startswith("Total") and summary[-1].endswith("4 frames")

    def test_empty_summary(self):
        assert OdometryHealthTracker().get_health_report() == "No odometry health data available"

    def test_unknown_status(self):
        with pytest.raises(ValueError):
            OdometryHealthTracker().record_result(0.0, "Great", 1, 1)
