"""
Odometry Package
================
Masked sparse RGB-D odometry and ground-truth replay.
"""

from odometry.features import FeaturePoint, Match, detect_features, match_features
from odometry.frontend import (BaseOdometry, GroundTruthOdometry, OdometryEstimate, OdometryStatus,
                               VisualOdometry)
from odometry.pose_estimation import RelativePose, TrackingLostError, estimate_relative_pose

__all__ = [
    "BaseOdometry",
    "FeaturePoint",
    "GroundTruthOdometry",
    "Match",
    "OdometryEstimate",
    "OdometryStatus",
    "RelativePose",
    "TrackingLostError",
    "VisualOdometry",
    "detect_features",
    "estimate_relative_pose",
    "match_features",
]
