"""
Odometry Front End
==================
Keyframe-based RGB-D visual odometry over masked frames, and a
ground-truth replay that shares its interface.

Each frame is matched against the current keyframe; the relative pose is
chained onto the keyframe's world pose. Tracking health is recorded per
frame as Ok, Degraded or Lost.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from config.pipeline_config import Config
from dataset.trajectory_io import Trajectory
from dataset.tum_reader import Frame
from geometry.pose import Pose, compose, relative_motion
from odometry.features import FeaturePoint, detect_features, match_features, stack_points
from odometry.pose_estimation import TrackingLostError, estimate_relative_pose
from tracking.masks import FrameMasks
from utils.health_tracker import OdometryHealthTracker
from utils.logger import setup_logger


class OdometryStatus(str, Enum):
    OK = "Ok"
    DEGRADED = "Degraded"
    LOST = "Lost"


@dataclass(frozen=True, eq=False)
class OdometryEstimate:
    timestamp: float
    pose: Pose
    inlier_count: int
    tracked_feature_count: int
    status: OdometryStatus
    feature_count: int = 0
    keyframe: bool = False

    def __post_init__(self):
        if self.inlier_count > self.tracked_feature_count:
            raise ValueError(f"{self.inlier_count} inliers exceed {self.tracked_feature_count} tracked features")


@dataclass(frozen=True, eq=False)
class Keyframe:
    timestamp: float
    pose: Pose
    features: Tuple[FeaturePoint, ...]
    points: np.ndarray


def extrapolate_pose(previous: Tuple[float, Pose], last: Tuple[float, Pose], timestamp: float) -> Pose:
    """
    Constant-velocity extrapolation of the last motion to timestamp.

    Args:
        previous: (time, pose) before last
        last: Most recent (time, pose)
        timestamp: Target time

    Returns:
        Extrapolated camera pose
    """
    (t0, p0), (t1, p1) = previous, last
    span = t1 - t0
    if span <= 0:
        return p1
    scale = (timestamp - t1) / span
    step = relative_motion(p0, p1)
    rotvec = Rotation.from_quat(step.quaternion).as_rotvec() * scale
    scaled = Pose(Rotation.from_rotvec(rotvec).as_quat(), step.translation * scale)
    return compose(p1, scaled)


class BaseOdometry(ABC):
    """
    Common state of odometry sources: pose history and health.
    """

    def __init__(self, name: str):
        self.name = name
        self.logger = setup_logger(name)
        self.health = OdometryHealthTracker()
        self.trajectory = Trajectory()

    @abstractmethod
    def track_frame(self, frame: Frame, masks: FrameMasks) -> OdometryEstimate:
        """Estimate the camera pose of a frame."""
        pass

    def predict_pose(self, timestamp: float) -> Pose:
        """
        Pose expected at timestamp before the frame is processed.

        Constant velocity from the last two poses; the last pose when only
        one exists; identity before the first frame.
        """
        n = len(self.trajectory)
        if n == 0:
            return Pose.identity()
        if n == 1:
            return self.trajectory[0][1]
        return extrapolate_pose(self.trajectory[n - 2], self.trajectory[n - 1], timestamp)

    def _record(self, estimate: OdometryEstimate) -> OdometryEstimate:
        self.trajectory.append(estimate.timestamp, estimate.pose)
        self.health.record_result(estimate.timestamp, estimate.status.value,
                                  estimate.inlier_count, estimate.tracked_feature_count)
        return estimate


class VisualOdometry(BaseOdometry):
    """
    Sparse keyframe odometry on features outside the odometry mask.
    """

    def __init__(self, cfg: Config, seed: int = 0, initial_pose: Optional[Pose] = None):
        super().__init__("VisualOdometry")
        self.cfg = cfg
        self.seed = int(seed)
        self.initial_pose = initial_pose if initial_pose is not None else Pose.identity()
        self.keyframe: Optional[Keyframe] = None
        self.frame_index = 0
        self.keyframe_count = 0

    def _detect(self, frame: Frame, masks: FrameMasks) -> List[FeaturePoint]:
        cfg = self.cfg
        return detect_features(frame.gray, frame.depth, masks.odometry_mask, frame.intrinsics,
                               target_count=cfg.target_features, fast_threshold=cfg.fast_threshold,
                               grid_cols=cfg.grid_cols, grid_rows=cfg.grid_rows)

    def _promote(self, frame: Frame, pose: Pose, features: List[FeaturePoint], reason: str) -> None:
        self.keyframe = Keyframe(frame.timestamp, pose, tuple(features), stack_points(features))
        self.keyframe_count += 1
        self.logger.debug(f"Keyframe {self.keyframe_count} at {frame.timestamp:.6f} ({reason}, "
                          f"{len(features)} features)")

    def track_frame(self, frame: Frame, masks: FrameMasks) -> OdometryEstimate:
        """
        Locate one frame.

        Args:
            frame: Current frame, later than any previous one
            masks: Tracker masks; only odometry_mask is used

        Returns:
            OdometryEstimate; estimation failures are reported as Lost
        """
        cfg = self.cfg
        features = self._detect(frame, masks)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, self.frame_index]))
        self.frame_index += 1

        if self.keyframe is None:
            status = OdometryStatus.OK if len(features) >= cfg.degraded_inliers else OdometryStatus.DEGRADED
            self._promote(frame, self.initial_pose, features, "first frame")
            return self._record(OdometryEstimate(frame.timestamp, self.initial_pose, len(features), len(features),
                                                 status, len(features), keyframe=True))

        keyframe = self.keyframe
        matches = match_features(features, keyframe.features, cfg.match_ratio)
        src = np.array([features[m.query].point_cam for m in matches]).reshape(-1, 3)
        dst = keyframe.points[[m.train for m in matches]].reshape(-1, 3)

        try:
            result = estimate_relative_pose(src, dst, cfg.ransac_iterations, cfg.inlier_threshold, rng)
        except TrackingLostError as e:
            pose = self.predict_pose(frame.timestamp)
            self.logger.warning(f"Tracking lost at {frame.timestamp:.6f}: {e}")
            promoted = len(features) >= cfg.degraded_inliers
            if promoted:
                self._promote(frame, pose, features, "restart after loss")
            return self._record(OdometryEstimate(frame.timestamp, pose, 0, len(matches), OdometryStatus.LOST,
                                                 len(features), keyframe=promoted))

        pose = compose(keyframe.pose, result.pose)
        inliers = result.inlier_count
        status = OdometryStatus.OK if inliers >= cfg.degraded_inliers else OdometryStatus.DEGRADED
        if status == OdometryStatus.DEGRADED:
            self.logger.debug(f"Degraded odometry at {frame.timestamp:.6f}: {inliers} inliers")

        reasons = []
        if inliers < cfg.keyframe_inlier_ratio * len(keyframe.features):
            reasons.append("inlier ratio")
        if result.pose.translation_norm() > cfg.keyframe_translation:
            reasons.append("translation")
        if result.pose.rotation_angle_deg() > cfg.keyframe_rotation_deg:
            reasons.append("rotation")
        if reasons:
            self._promote(frame, pose, features, ", ".join(reasons))

        return self._record(OdometryEstimate(frame.timestamp, pose, inliers, len(matches), status,
                                             len(features), keyframe=bool(reasons)))


class GroundTruthOdometry(BaseOdometry):
    """
    Replays groundtruth.txt poses; the feature pipeline is bypassed.
    """

    def __init__(self, groundtruth: Trajectory, max_dt: float = 0.02):
        super().__init__("GroundTruthOdometry")
        self.groundtruth = groundtruth
        self.max_dt = max_dt

    def predict_pose(self, timestamp: float) -> Pose:
        pose = self.groundtruth.pose_near(timestamp, self.max_dt)
        return pose if pose is not None else super().predict_pose(timestamp)

    def track_frame(self, frame: Frame, masks: FrameMasks) -> OdometryEstimate:
        pose = self.groundtruth.pose_near(frame.timestamp, self.max_dt)
        if pose is None:
            self.logger.warning(f"No ground-truth pose within {self.max_dt}s of {frame.timestamp:.6f}")
            return self._record(OdometryEstimate(frame.timestamp, super().predict_pose(frame.timestamp), 0, 0,
                                                 OdometryStatus.LOST))
        return self._record(OdometryEstimate(frame.timestamp, pose, 0, 0, OdometryStatus.OK))
