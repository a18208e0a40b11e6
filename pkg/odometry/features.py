"""
Sparse Features
===============
FAST corners with non-maximum suppression, grid bucketing, sub-pixel
refinement and ORB (rBRIEF) descriptors, plus Hamming matching with a
ratio test and a mutual-consistency check.

Corners on (or within a few pixels of) the odometry mask and corners
without valid depth never become features.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import cv2
import numpy as np

from geometry.camera import Intrinsics, backproject_pixels

# ORB samples a 31x31 patch around each corner
PATCH_SIZE = 31
EDGE_BORDER = 31
MASK_DILATION = 3
SUBPIX_WINDOW = (3, 3)
SUBPIX_CRITERIA = (cv2.TERM_CRITERIA_EPS + cv2.TERM_CRITERIA_MAX_ITER, 20, 0.01)
MAX_SUBPIX_SHIFT = 1.5
DEPTH_CONSISTENCY = 1.02


@dataclass(frozen=True, eq=False)
class FeaturePoint:
    pixel: np.ndarray
    point_cam: np.ndarray
    descriptor: np.ndarray
    response: float


class Match(NamedTuple):
    query: int
    train: int
    distance: float


def _metric_depth(depth: np.ndarray, intr: Intrinsics) -> np.ndarray:
    """Raw integer depth is scaled by the camera; float depth is taken as meters."""
    if np.issubdtype(depth.dtype, np.integer):
        return intr.depth_to_meters(depth)
    return depth.astype(np.float64)


def sample_depth(depth_m: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Depth at sub-pixel positions.

    Inverse depth is interpolated bilinearly when the four neighbours are
    valid and agree within 2%; otherwise the nearest pixel's depth is used.

    Args:
        depth_m: Metric depth image, 0 where invalid
        u, v: Sub-pixel coordinates (pixel centres at integers)

    Returns:
        Depth per position, 0 where no valid value exists
    """
    h, w = depth_m.shape
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    u0 = np.clip(np.floor(u).astype(int), 0, w - 2)
    v0 = np.clip(np.floor(v).astype(int), 0, h - 2)
    fu = np.clip(u - u0, 0.0, 1.0)
    fv = np.clip(v - v0, 0.0, 1.0)

    d00 = depth_m[v0, u0]
    d10 = depth_m[v0, u0 + 1]
    d01 = depth_m[v0 + 1, u0]
    d11 = depth_m[v0 + 1, u0 + 1]
    stack = np.stack([d00, d10, d01, d11])
    lo = stack.min(axis=0)
    hi = stack.max(axis=0)
    smooth = (lo > 0) & (hi <= DEPTH_CONSISTENCY * lo)

    nearest = depth_m[np.clip(np.rint(v).astype(int), 0, h - 1), np.clip(np.rint(u).astype(int), 0, w - 1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = ((1 - fu) * (1 - fv) / d00 + fu * (1 - fv) / d10
               + (1 - fu) * fv / d01 + fu * fv / d11)
        interpolated = np.where(smooth, 1.0 / np.where(smooth, inv, 1.0), 0.0)
    return np.where(smooth, interpolated, nearest)


def bucket_indices(u: np.ndarray, v: np.ndarray, response: np.ndarray, shape: Tuple[int, int],
                   grid_cols: int, grid_rows: int, target_count: int) -> np.ndarray:
    """
    Select corners so that every grid cell keeps at most its share.

    Each cell keeps its strongest ceil(target / cells) corners; if more than
    target_count survive, the strongest target_count overall are kept.

    Returns:
        Indices of kept corners, strongest first
    """
    if len(u) == 0 or target_count <= 0:
        return np.zeros(0, dtype=int)
    h, w = shape
    quota = math.ceil(target_count / (grid_cols * grid_rows))
    col = np.minimum((u * grid_cols / w).astype(int), grid_cols - 1)
    row = np.minimum((v * grid_rows / h).astype(int), grid_rows - 1)
    cell = row * grid_cols + col

    order = np.lexsort((u, v, -response))
    taken = np.zeros(grid_cols * grid_rows, dtype=int)
    keep = []
    for i in order:
        if taken[cell[i]] < quota:
            taken[cell[i]] += 1
            keep.append(i)
    return np.asarray(keep[:target_count], dtype=int)


def detect_features(gray: np.ndarray, depth: np.ndarray, mask: Optional[np.ndarray], intr: Intrinsics,
                    target_count: int = 500, fast_threshold: int = 20, grid_cols: int = 8,
                    grid_rows: int = 6) -> List[FeaturePoint]:
    """
    Detect features outside the odometry mask.

    Args:
        gray: 8-bit intensity image
        depth: Raw depth (integer units) or metric depth (float)
        mask: Boolean odometry mask, True = excluded; None for no mask
        intr: Camera intrinsics
        target_count: Upper bound on returned features
        fast_threshold: FAST intensity threshold
        grid_cols, grid_rows: Bucketing grid

    Returns:
        Features, strongest first (may be empty)
    """
    if gray.shape != depth.shape:
        raise ValueError(f"image {gray.shape} and depth {depth.shape} differ in size")
    h, w = gray.shape
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    depth_m = _metric_depth(depth, intr)

    fast = cv2.FastFeatureDetector_create(threshold=int(fast_threshold), nonmaxSuppression=True)
    keypoints = fast.detect(gray, None)
    if not keypoints:
        return []
    pts = np.array([kp.pt for kp in keypoints], dtype=np.float64)
    response = np.array([kp.response for kp in keypoints], dtype=np.float64)
    u = pts[:, 0]
    v = pts[:, 1]
    ui = np.rint(u).astype(int)
    vi = np.rint(v).astype(int)

    keep = (ui >= EDGE_BORDER) & (ui < w - EDGE_BORDER) & (vi >= EDGE_BORDER) & (vi < h - EDGE_BORDER)
    keep &= depth_m[np.clip(vi, 0, h - 1), np.clip(ui, 0, w - 1)] > 0
    blocked = None
    if mask is not None and mask.any():
        size = 2 * MASK_DILATION + 1
        kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (size, size))
        blocked = cv2.dilate(mask.astype(np.uint8), kernel) > 0
        keep &= ~blocked[np.clip(vi, 0, h - 1), np.clip(ui, 0, w - 1)]

    candidates = np.flatnonzero(keep)
    chosen = candidates[bucket_indices(u[candidates], v[candidates], response[candidates], (h, w),
                                       grid_cols, grid_rows, target_count)]
    if len(chosen) == 0:
        return []

    corners = pts[chosen].astype(np.float32).reshape(-1, 1, 2)
    refined = cv2.cornerSubPix(gray, corners.copy(), SUBPIX_WINDOW, (-1, -1), SUBPIX_CRITERIA).reshape(-1, 2)
    original = pts[chosen]
    shift = np.linalg.norm(refined - original, axis=1)
    refined = np.where((shift <= MAX_SUBPIX_SHIFT)[:, None], refined.astype(np.float64), original)

    ru = refined[:, 0]
    rv = refined[:, 1]
    z = sample_depth(depth_m, ru, rv)
    valid = z > 0
    if mask is not None:
        valid &= ~mask[np.clip(np.rint(rv).astype(int), 0, h - 1), np.clip(np.rint(ru).astype(int), 0, w - 1)]

    cv_keypoints = []
    for i in np.flatnonzero(valid):
        cv_keypoints.append(cv2.KeyPoint(float(ru[i]), float(rv[i]), PATCH_SIZE, 0.0,
                                         float(response[chosen[i]]), 0, int(i)))
    if not cv_keypoints:
        return []

    orb = cv2.ORB_create(nfeatures=max(target_count, 1), nlevels=1, edgeThreshold=EDGE_BORDER, patchSize=PATCH_SIZE)
    described, descriptors = orb.compute(gray, cv_keypoints)
    if descriptors is None or not described:
        return []

    index = np.array([kp.class_id for kp in described], dtype=int)
    points = backproject_pixels(ru[index], rv[index], z[index], intr)
    features = []
    for row, i in enumerate(index):
        features.append(FeaturePoint(
            pixel=np.array([ru[i], rv[i]]),
            point_cam=points[row],
            descriptor=descriptors[row].copy(),
            response=float(response[chosen[i]]),
        ))
    features.sort(key=lambda f: (-f.response, f.pixel[1], f.pixel[0]))
    return features


def stack_descriptors(features: Sequence[FeaturePoint]) -> np.ndarray:
    if not features:
        return np.zeros((0, 32), dtype=np.uint8)
    return np.stack([f.descriptor for f in features]).astype(np.uint8)


def stack_points(features: Sequence[FeaturePoint]) -> np.ndarray:
    if not features:
        return np.zeros((0, 3))
    return np.stack([f.point_cam for f in features])


def match_features(a: Sequence[FeaturePoint], b: Sequence[FeaturePoint], ratio: float = 0.8) -> List[Match]:
    """
    Hamming nearest-neighbour matching from a to b.

    A pair survives when its distance is strictly below ratio times the
    second-best distance and b's best neighbour in a is the same feature.

    Args:
        a: Query features
        b: Train features
        ratio: Best/second-best distance ratio bound

    Returns:
        Matches ordered by query index
    """
    if not a or not b:
        return []
    desc_a = stack_descriptors(a)
    desc_b = stack_descriptors(b)
    matcher = cv2.BFMatcher(cv2.NORM_HAMMING, crossCheck=False)

    forward = matcher.knnMatch(desc_a, desc_b, k=2)
    backward = matcher.match(desc_b, desc_a)
    best_in_a = {m.queryIdx: m.trainIdx for m in backward}

    matches = []
    for pair in forward:
        if not pair:
            continue
        best = pair[0]
        if len(pair) > 1 and not best.distance < ratio * pair[1].distance:
            continue
        if best_in_a.get(best.trainIdx) != best.queryIdx:
            continue
        matches.append(Match(best.queryIdx, best.trainIdx, float(best.distance)))
    matches.sort()
    return matches
