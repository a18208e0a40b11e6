"""
Tracking Package
================
Per-object Kalman tracking, motion classification and exclusion masks.
"""

from tracking.association import Assignment, associate
from tracking.kalman import NumericalError, TimeOrderError, TrackState, ekf_predict, ekf_update, initial_state
from tracking.masks import FrameMasks, ShapeError, mask_iou
from tracking.tracker import DynamicObjectTracker, MotionStatus, ObjectReport, StepResult, Track, classify

__all__ = [
    "Assignment",
    "DynamicObjectTracker",
    "FrameMasks",
    "MotionStatus",
    "NumericalError",
    "ObjectReport",
    "ShapeError",
    "StepResult",
    "TimeOrderError",
    "Track",
    "TrackState",
    "associate",
    "classify",
    "ekf_predict",
    "ekf_update",
    "initial_state",
    "mask_iou",
]
