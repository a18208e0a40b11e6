"""
Object Centroids
================
World-frame 3D position of a detected object from the depth at its
bounding-box center, with a mask-median fallback for holes and outliers.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.settings import CENTROID_OUTLIER_RATIO
from dataset.detections import Detection
from geometry.camera import Intrinsics, backproject
from geometry.pose import Pose, transform


class CentroidSource(str, Enum):
    BBOX_CENTER_DEPTH = "bbox-center-depth"
    MASK_MEDIAN_DEPTH = "mask-median-depth"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class Centroid:
    position: np.ndarray
    source: CentroidSource
    valid: bool
    depth: float = 0.0

    @classmethod
    def invalid(cls) -> "Centroid":
        return cls(np.zeros(3), CentroidSource.NONE, False)


def compute_centroid(det: Detection, depth: np.ndarray, intr: Intrinsics, cam_pose: Pose,
                     outlier_ratio: float = CENTROID_OUTLIER_RATIO) -> Centroid:
    """
    Back-project the bbox center and move it to the world frame.

    The center depth is used unless it is missing or differs from the median
    of the valid in-mask depths by more than outlier_ratio of that median, in
    which case the median is placed on the center pixel's ray.

    Args:
        det: Detection with bbox and mask
        depth: Raw 16-bit depth image of the frame
        intr: Camera intrinsics
        cam_pose: Camera-to-world pose for this frame
        outlier_ratio: Relative deviation that rejects the center depth

    Returns:
        Centroid; valid is False when the object has no valid depth at all
    """
    height, width = depth.shape
    center = det.center
    u = min(max(int(np.floor(center[0])), 0), width - 1)
    v = min(max(int(np.floor(center[1])), 0), height - 1)
    center_depth = float(depth[v, u]) / intr.depth_scale

    mask_depths = depth[det.mask & (depth > 0)]
    median = float(np.median(mask_depths)) / intr.depth_scale if mask_depths.size else None

    if center_depth > 0 and (median is None or abs(center_depth - median) <= outlier_ratio * median):
        chosen, source = center_depth, CentroidSource.BBOX_CENTER_DEPTH
    elif median is not None and median > 0:
        chosen, source = median, CentroidSource.MASK_MEDIAN_DEPTH
    else:
        return Centroid.invalid()

    point_cam = backproject(center, chosen, intr)
    return Centroid(transform(cam_pose, point_cam), source, True, chosen)
