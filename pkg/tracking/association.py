"""
Track Association
=================
Greedy nearest-neighbour matching of predicted tracks to detections:
same class only, Euclidean gate on the centroid, mask IoU for detections
without a usable centroid.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from dataset.detections import Detection
from segmentation.centroid import Centroid
from tracking.masks import mask_iou


@dataclass
class Assignment:
    matches: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_tracks: List[int] = field(default_factory=list)
    unmatched_detections: List[int] = field(default_factory=list)


def associate(tracks: Sequence, observations: Sequence[Tuple[Detection, Centroid]], gate: float,
              iou_threshold: float = 0.5) -> Assignment:
    """
    Match tracks to observations.

    Args:
        tracks: Objects with class_name, state (predicted) and last_mask
        observations: (detection, centroid) pairs in detection order
        gate: Largest accepted centroid distance in meters
        iou_threshold: Minimum mask IoU for matching an invalid centroid

    Returns:
        Assignment with (track index, observation index) matches
    """
    candidates = []
    for ti, track in enumerate(tracks):
        predicted = track.state.position
        for oi, (det, centroid) in enumerate(observations):
            if not centroid.valid or det.class_name != track.class_name:
                continue
            distance = float(np.linalg.norm(centroid.position - predicted))
            if distance <= gate:
                candidates.append((distance, ti, oi))
    candidates.sort()

    used_tracks = set()
    used_obs = set()
    matches = []
    for _, ti, oi in candidates:
        if ti in used_tracks or oi in used_obs:
            continue
        used_tracks.add(ti)
        used_obs.add(oi)
        matches.append((ti, oi))

    # Detections without depth fall back to mask overlap with the last seen mask
    for oi, (det, centroid) in enumerate(observations):
        if centroid.valid or oi in used_obs:
            continue
        best = None
        for ti, track in enumerate(tracks):
            if ti in used_tracks or track.class_name != det.class_name or track.last_mask is None:
                continue
            iou = mask_iou(det.mask, track.last_mask)
            if iou >= iou_threshold and (best is None or iou > best[0]):
                best = (iou, ti)
        if best is not None:
            used_tracks.add(best[1])
            used_obs.add(oi)
            matches.append((best[1], oi))

    matches.sort()
    return Assignment(
        matches=matches,
        unmatched_tracks=[ti for ti in range(len(tracks)) if ti not in used_tracks],
        unmatched_detections=[oi for oi in range(len(observations)) if oi not in used_obs],
    )
