"""
Dynamic Object Tracker
======================
Keeps one constant-velocity filter per detected dynamic object, decides
whether each object is moving or temporarily static, and assembles the
per-frame odometry and mapping exclusion masks.

Objects classified moving are removed from odometry; every detected object
(moving or idle) and every recently seen but currently missed object is
removed from mapping.
"""

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config.pipeline_config import Config
from dataset.detections import Detection
from geometry.camera import Intrinsics
from geometry.pose import Pose
from segmentation.centroid import Centroid, compute_centroid
from segmentation.detection_filter import filter_detections
from tracking.association import associate
from tracking.kalman import TimeOrderError, TrackState, ekf_predict, ekf_update, initial_state
from tracking.masks import FrameMasks, mask_iou, union_masks
from utils.logger import setup_logger


class MotionStatus(str, Enum):
    MOVING = "Moving"
    TEMP_STATIC = "TempStatic"


@dataclass(frozen=True, eq=False)
class Track:
    track_id: int
    class_name: str
    state: TrackState
    frames_since_seen: int
    motion_status: MotionStatus
    ever_moving: bool
    last_mask: np.ndarray
    last_bbox: Tuple[int, int, int, int]
    last_update_timestamp: float

    @property
    def speed(self) -> float:
        return self.state.speed


@dataclass(frozen=True)
class ObjectReport:
    timestamp: float
    track_id: int
    class_name: str
    position: Tuple[float, float, float]
    speed: float
    status: str
    matched: bool

    def to_line(self) -> str:
        x, y, z = self.position
        seen = "seen" if self.matched else "predicted"
        return (f"{self.timestamp:.6f} {self.track_id} {self.class_name} "
                f"{x:.4f} {y:.4f} {z:.4f} {self.speed:.4f} {self.status} {seen}")


@dataclass(frozen=True, eq=False)
class StepResult:
    tracks: Tuple[Track, ...]
    masks: FrameMasks
    reports: Tuple[ObjectReport, ...]
    detections: Tuple[Detection, ...]


def classify(track: Track, cfg: Config, iou_with_prev: float) -> MotionStatus:
    """
    Moving if the filtered speed exceeds the class threshold (strictly).

    With iou_rule "hysteresis" an object that has moved before stays Moving
    while its mask keeps overlapping the previous one by at least
    iou_threshold. With "displacement" a mask overlap below iou_threshold
    marks the object Moving.
    """
    if track.speed > cfg.velocity_threshold_for(track.class_name):
        return MotionStatus.MOVING
    if cfg.iou_rule == "hysteresis":
        if track.ever_moving and iou_with_prev >= cfg.iou_threshold:
            return MotionStatus.MOVING
    elif iou_with_prev < cfg.iou_threshold:
        return MotionStatus.MOVING
    return MotionStatus.TEMP_STATIC


class DynamicObjectTracker:
    """
    Stateful multi-object tracker; one step() per frame, in timestamp order.
    """

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.tracks: List[Track] = []
        self.last_timestamp: Optional[float] = None
        self.next_id = 1
        self.logger = setup_logger("DynamicObjectTracker")

    def step(self, detections: Sequence[Detection], depth: np.ndarray, intrinsics: Intrinsics,
             cam_pose: Pose, timestamp: float) -> StepResult:
        """
        Process one frame.

        Args:
            detections: Raw detections of the frame
            depth: Raw depth image
            intrinsics: Camera intrinsics
            cam_pose: Camera-to-world pose used for centroids
            timestamp: Frame time in seconds

        Returns:
            StepResult with the surviving tracks, masks and per-object reports

        Raises:
            TimeOrderError: If timestamp does not exceed the previous one
        """
        cfg = self.cfg
        shape = depth.shape
        if self.last_timestamp is not None and not timestamp > self.last_timestamp:
            raise TimeOrderError(f"timestamp {timestamp:.6f} after {self.last_timestamp:.6f}")

        # predict
        tracks = list(self.tracks)
        if self.last_timestamp is not None:
            dt = timestamp - self.last_timestamp
            tracks = [replace(t, state=ekf_predict(t.state, dt, cfg.q_pos, cfg.q_vel)) for t in tracks]
        self.last_timestamp = timestamp

        # filter and lift detections
        kept = filter_detections(detections, cfg)
        observations: List[Tuple[Detection, Centroid]] = [
            (det, compute_centroid(det, depth, intrinsics, cam_pose, cfg.centroid_outlier_ratio)) for det in kept
        ]

        # associate
        assignment = associate(tracks, observations, cfg.association_gate, cfg.iou_threshold)

        # update and classify matched tracks
        updated_ids = set()
        moving_masks = []
        for ti, oi in assignment.matches:
            track = tracks[ti]
            det, centroid = observations[oi]
            state = ekf_update(track.state, centroid.position, cfg.r_meas) if centroid.valid else track.state
            iou_with_prev = mask_iou(det.mask, track.last_mask)
            track = replace(track, state=state, frames_since_seen=0, last_mask=det.mask,
                            last_bbox=det.bbox, last_update_timestamp=timestamp)
            status = classify(track, cfg, iou_with_prev)
            if status != track.motion_status:
                self.logger.debug(f"Track {track.track_id} ({track.class_name}) -> {status.value} "
                                  f"at {track.speed:.2f} m/s")
            track = replace(track, motion_status=status,
                            ever_moving=track.ever_moving or status == MotionStatus.MOVING)
            tracks[ti] = track
            updated_ids.add(track.track_id)
            if status == MotionStatus.MOVING:
                moving_masks.append(det.mask)

        # spawn for unmatched detections, highest score first
        spawned = []
        for oi in assignment.unmatched_detections:
            det, centroid = observations[oi]
            if not centroid.valid or len(tracks) + len(spawned) >= cfg.max_tracked_objects:
                continue
            track = Track(
                track_id=self.next_id,
                class_name=det.class_name,
                state=initial_state(centroid.position, cfg.init_pos_std, cfg.init_vel_std),
                frames_since_seen=0,
                motion_status=MotionStatus.TEMP_STATIC,
                ever_moving=False,
                last_mask=det.mask,
                last_bbox=det.bbox,
                last_update_timestamp=timestamp,
            )
            self.next_id += 1
            spawned.append(track)
            self.logger.info(f"Track {track.track_id} ({track.class_name}) spawned at "
                             f"{np.round(centroid.position, 3).tolist()}")

        # age unmatched tracks, drop departed ones
        survivors = []
        for ti, track in enumerate(tracks):
            if track.track_id in updated_ids:
                survivors.append(track)
                continue
            track = replace(track, frames_since_seen=track.frames_since_seen + 1)
            if track.frames_since_seen >= cfg.termination_frames:
                self.logger.info(f"Track {track.track_id} ({track.class_name}) terminated after "
                                 f"{track.frames_since_seen} unmatched frames")
                continue
            survivors.append(track)

        self.tracks = survivors + spawned
        matched_ids = updated_ids | {t.track_id for t in spawned}

        # masks
        stale_masks = [t.last_mask for t in self.tracks if t.track_id not in matched_ids]
        mapping_mask = union_masks([det.mask for det in kept] + stale_masks, shape)
        odometry_mask = union_masks(moving_masks, shape)
        masks = FrameMasks(odometry_mask, mapping_mask)

        # report
        reports = tuple(
            ObjectReport(
                timestamp=timestamp,
                track_id=t.track_id,
                class_name=t.class_name,
                position=tuple(float(c) for c in t.state.position),
                speed=t.speed,
                status=t.motion_status.value,
                matched=t.track_id in matched_ids,
            )
            for t in sorted(self.tracks, key=lambda t: t.track_id)
        )
        return StepResult(tuple(self.tracks), masks, reports, tuple(kept))


class TrackLogWriter:
    """Appends per-object report lines to a text log."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._file = open(self.path, "w", encoding="utf-8")
        self._file.write("# timestamp id class cx cy cz speed status seen\n")

    def write(self, reports: Sequence[ObjectReport]) -> None:
        for report in reports:
            self._file.write(report.to_line() + "\n")

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "TrackLogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
