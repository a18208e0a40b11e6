"""
SE(3) Poses
===========
Rigid transforms stored as a unit quaternion (x, y, z, w) and a translation.
A camera pose maps camera-frame points into the world frame.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation


@dataclass(frozen=True, eq=False)
class Pose:
    """Immutable rigid transform p -> R p + t."""

    quaternion: np.ndarray
    translation: np.ndarray
    _rotation: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = np.asarray(self.quaternion, dtype=np.float64).reshape(4)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        norm = np.linalg.norm(q)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError(f"invalid quaternion {q!r}")
        if not np.all(np.isfinite(t)):
            raise ValueError(f"invalid translation {t!r}")
        q = q / norm
        # Single sign per rotation keeps written trajectories deterministic
        if q[3] < 0:
            q = -q
        q.setflags(write=False)
        t = t.copy()
        t.setflags(write=False)
        rotation = Rotation.from_quat(q).as_matrix()
        rotation.setflags(write=False)
        object.__setattr__(self, "quaternion", q)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "_rotation", rotation)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.array([0.0, 0.0, 0.0, 1.0]), np.zeros(3))

    @classmethod
    def from_rotation(cls, rotation: np.ndarray, translation: Sequence[float]) -> "Pose":
        """Build from a 3x3 rotation matrix and a translation."""
        return cls(Rotation.from_matrix(np.asarray(rotation, dtype=np.float64)).as_quat(), translation)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose":
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls.from_rotation(matrix[:3, :3], matrix[:3, 3])

    @property
    def rotation_matrix(self) -> np.ndarray:
        return self._rotation

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        out = np.eye(4)
        out[:3, :3] = self._rotation
        out[:3, 3] = self.translation
        return out

    def rotation_angle_deg(self) -> float:
        """Magnitude of the rotation in degrees."""
        w = min(1.0, abs(float(self.quaternion[3])))
        return float(np.degrees(2.0 * np.arccos(w)))

    def translation_norm(self) -> float:
        return float(np.linalg.norm(self.translation))

    def is_close(self, other: "Pose", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.matrix(), other.matrix(), atol=atol, rtol=0.0))

    def __repr__(self) -> str:
        q = ", ".join(f"{c:.6f}" for c in self.quaternion)
        t = ", ".join(f"{c:.6f}" for c in self.translation)
        return f"Pose(q=[{q}], t=[{t}])"


def transform(pose: Pose, p) -> np.ndarray:
    """Apply pose to one point: R p + t."""
    return pose.rotation_matrix @ np.asarray(p, dtype=np.float64) + pose.translation


def transform_points(pose: Pose, points: np.ndarray) -> np.ndarray:
    """Apply pose to an (N, 3) array of points."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return points @ pose.rotation_matrix.T + pose.translation


def compose(a: Pose, b: Pose) -> Pose:
    """Pose mapping p to a(b(p))."""
    rotation = Rotation.from_quat(a.quaternion) * Rotation.from_quat(b.quaternion)
    translation = a.rotation_matrix @ b.translation + a.translation
    return Pose(rotation.as_quat(), translation)


def invert(a: Pose) -> Pose:
    """Inverse transform, so that compose(a, invert(a)) is the identity."""
    inverse = Rotation.from_quat(a.quaternion).inv()
    return Pose(inverse.as_quat(), -(a.rotation_matrix.T @ a.translation))


def relative_motion(a: Pose, b: Pose) -> Pose:
    """Motion from a to b expressed in a's frame: invert(a) then b."""
    return compose(invert(a), b)
