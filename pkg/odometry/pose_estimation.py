"""
Robust Relative Pose
====================
RANSAC over minimal 3-point rigid alignments between matched 3D points,
followed by one rigid refit on the best hypothesis' inlier set.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry.alignment import DegenerateGeometryError, rigid_align_matrix
from geometry.pose import Pose

MIN_SAMPLE_AREA = 1e-6


class TrackingLostError(RuntimeError):
    """No pose hypothesis is supported by enough correspondences."""


@dataclass(frozen=True, eq=False)
class RelativePose:
    pose: Pose
    inliers: np.ndarray

    @property
    def inlier_count(self) -> int:
        return int(self.inliers.sum())


def _batched_kabsch(src: np.ndarray, dst: np.ndarray):
    """Rotations and translations for a batch of (B, 3, 3) point triples."""
    mu_src = src.mean(axis=1, keepdims=True)
    mu_dst = dst.mean(axis=1, keepdims=True)
    H = np.einsum("bni,bnj->bij", src - mu_src, dst - mu_dst)
    U, S, Vt = np.linalg.svd(H)
    V = np.transpose(Vt, (0, 2, 1))
    Ut = np.transpose(U, (0, 2, 1))
    d = np.sign(np.linalg.det(V @ Ut))
    d[d == 0] = 1.0
    D = np.zeros_like(H)
    D[:, 0, 0] = 1.0
    D[:, 1, 1] = 1.0
    D[:, 2, 2] = d
    R = V @ D @ Ut
    t = mu_dst[:, 0, :] - np.einsum("bij,bj->bi", R, mu_src[:, 0, :])
    return R, t, S


def estimate_relative_pose(src: np.ndarray, dst: np.ndarray, iterations: int = 200, inlier_threshold: float = 0.05,
                           rng: Optional[np.random.Generator] = None) -> RelativePose:
    """
    Rigid transform T with dst ~ T(src), robust to outliers.

    Args:
        src: (N, 3) points in the frame being located
        dst: (N, 3) corresponding points in the reference frame
        iterations: RANSAC hypotheses
        inlier_threshold: Largest 3D residual (m) counted as inlier
        rng: Random generator; a fixed default seed when omitted

    Returns:
        RelativePose with the refitted transform and the inlier flags of
        the best hypothesis at inlier_threshold

    Raises:
        TrackingLostError: Fewer than 3 correspondences or no hypothesis
            with at least 3 inliers
    """
    src = np.asarray(src, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 3)
    n = len(src)
    if n < 3:
        raise TrackingLostError(f"{n} correspondences, need at least 3")
    rng = rng if rng is not None else np.random.default_rng(0)

    samples = np.stack([rng.choice(n, size=3, replace=False) for _ in range(max(iterations, 1))])
    tri_src = src[samples]
    tri_dst = dst[samples]

    # Nearly collinear triples give unstable rotations
    area = np.linalg.norm(np.cross(tri_src[:, 1] - tri_src[:, 0], tri_src[:, 2] - tri_src[:, 0]), axis=1)
    R, t, S = _batched_kabsch(tri_src, tri_dst)
    usable = (area > MIN_SAMPLE_AREA) & (S[:, 1] > 1e-10 * np.maximum(S[:, 0], 1e-300))

    moved = np.einsum("bij,nj->bni", R, src) + t[:, None, :]
    residuals = np.linalg.norm(moved - dst[None, :, :], axis=2)
    counts = np.where(usable, (residuals <= inlier_threshold).sum(axis=1), -1)
    best = int(np.argmax(counts))
    if counts[best] < 3:
        raise TrackingLostError(f"best hypothesis has {max(counts[best], 0)} inliers")

    inliers = residuals[best] <= inlier_threshold
    try:
        fit_R, fit_t = rigid_align_matrix(src[inliers], dst[inliers])
    except DegenerateGeometryError as e:
        raise TrackingLostError(str(e)) from e
    return RelativePose(Pose.from_rotation(fit_R, fit_t), inliers)
