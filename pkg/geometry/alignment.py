"""
Rigid Alignment
===============
Closed-form least-squares SE(3) fit between corresponding point sets
(SVD with reflection correction, no scale).
"""

from typing import Tuple

import numpy as np

from geometry.pose import Pose

# Second singular value below this fraction of the first means the
# points are collinear (or coincident) and the rotation is undetermined
DEGENERACY_RATIO = 1e-10


class DegenerateGeometryError(ValueError):
    """Raised when point sets cannot determine a rigid transform."""
    pass


def _as_points(points) -> np.ndarray:
    array = np.asarray(points, dtype=np.float64)
    if array.ndim != 2 or array.shape[1] != 3:
        array = array.reshape(-1, 3)
    return array


def rigid_align_matrix(src, dst) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rotation and translation minimising sum ||dst_i - (R src_i + t)||^2.

    Args:
        src: (N, 3) source points
        dst: (N, 3) destination points

    Returns:
        (R, t) with det(R) = +1

    Raises:
        DegenerateGeometryError: Fewer than 3 pairs, mismatched lengths
            or a collinear configuration
    """
    src = _as_points(src)
    dst = _as_points(dst)
    if src.shape != dst.shape:
        raise DegenerateGeometryError(f"point sets differ in size: {len(src)} vs {len(dst)}")
    if len(src) < 3:
        raise DegenerateGeometryError(f"need at least 3 point pairs, got {len(src)}")

    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    src_c = src - mu_src
    dst_c = dst - mu_dst

    H = src_c.T @ dst_c
    U, S, Vt = np.linalg.svd(H)
    if S[0] <= 0.0 or S[1] < DEGENERACY_RATIO * S[0]:
        raise DegenerateGeometryError("points are collinear or coincident")

    D = np.eye(3)
    if np.linalg.det(Vt.T @ U.T) < 0:
        D[2, 2] = -1.0
    R = Vt.T @ D @ U.T
    t = mu_dst - R @ mu_src
    return R, t


def rigid_align(src, dst) -> Pose:
    """
    SE(3) transform taking src onto dst in the least-squares sense.

    Args:
        src: Source points, shape (N, 3), N >= 3
        dst: Destination points in the same order

    Returns:
        Pose T with dst ~ T(src)
    """
    R, t = rigid_align_matrix(src, dst)
    return Pose.from_rotation(R, t)


def alignment_residual(pose: Pose, src, dst) -> float:
    """Sum of squared distances between dst and the transformed src."""
    src = _as_points(src)
    dst = _as_points(dst)
    moved = src @ pose.rotation_matrix.T + pose.translation
    return float(np.sum((dst - moved) ** 2))
