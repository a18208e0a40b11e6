"""
Trajectory Files
================
TUM trajectory text format: "timestamp tx ty tz qx qy qz qw" per line.
"""

from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from geometry.pose import Pose
from utils.data_validator import FormatError, OrderViolationError


class Trajectory:
    """
    Ordered (timestamp, pose) samples with strictly increasing timestamps.
    """

    def __init__(self, samples: Optional[Iterable[Tuple[float, Pose]]] = None):
        self._timestamps: List[float] = []
        self._poses: List[Pose] = []
        for timestamp, pose in samples or ():
            self.append(timestamp, pose)

    def append(self, timestamp: float, pose: Pose) -> None:
        """
        Add a sample at the end.

        Raises:
            OrderViolationError: If timestamp does not exceed the last one
        """
        timestamp = float(timestamp)
        if self._timestamps and timestamp <= self._timestamps[-1]:
            raise OrderViolationError(f"timestamp {timestamp:.6f} after {self._timestamps[-1]:.6f}")
        self._timestamps.append(timestamp)
        self._poses.append(pose)

    def __len__(self) -> int:
        return len(self._timestamps)

    def __iter__(self) -> Iterator[Tuple[float, Pose]]:
        return iter(zip(self._timestamps, self._poses))

    def __getitem__(self, index: int) -> Tuple[float, Pose]:
        return self._timestamps[index], self._poses[index]

    @property
    def timestamps(self) -> np.ndarray:
        return np.array(self._timestamps, dtype=np.float64)

    @property
    def poses(self) -> List[Pose]:
        return list(self._poses)

    def positions(self) -> np.ndarray:
        """(N, 3) translations."""
        if not self._poses:
            return np.zeros((0, 3))
        return np.stack([pose.translation for pose in self._poses])

    def pose_near(self, timestamp: float, max_dt: float) -> Optional[Pose]:
        """Pose whose timestamp is closest to timestamp within max_dt."""
        if not self._timestamps:
            return None
        stamps = self.timestamps
        k = int(np.argmin(np.abs(stamps - timestamp)))
        if abs(stamps[k] - timestamp) > max_dt + 1e-9:
            return None
        return self._poses[k]


def format_pose_line(timestamp: float, pose: Pose) -> str:
    values = list(pose.translation) + list(pose.quaternion)
    return f"{timestamp:.6f} " + " ".join(f"{v:.10g}" for v in values)


def write_trajectory(traj: Trajectory, path: Union[str, Path], header: Optional[str] = None) -> Path:
    """
    Write a trajectory in TUM format.

    Args:
        traj: Trajectory to write
        path: Destination file
        header: Optional comment line

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        if header:
            f.write(f"# {header}\n")
        for timestamp, pose in traj:
            f.write(format_pose_line(timestamp, pose) + "\n")
    return path


def read_trajectory(path: Union[str, Path]) -> Trajectory:
    """
    Read a TUM trajectory file; '#' lines and blank lines are skipped.

    Raises:
        FormatError: Missing file or malformed line (with line number)
        OrderViolationError: Timestamps not strictly increasing
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError("trajectory file not found", path)

    traj = Trajectory()
    last = None
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 8:
                raise FormatError(f"expected 8 fields, got {len(parts)}", path, line_number)
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise FormatError(f"non-numeric field in {line!r}", path, line_number)
            if not all(np.isfinite(values)):
                raise FormatError("non-finite value", path, line_number)

            timestamp = values[0]
            if last is not None and timestamp <= last:
                raise OrderViolationError(f"timestamp {parts[0]} does not increase", path, line_number)
            try:
                pose = Pose(np.array(values[4:8]), np.array(values[1:4]))
            except ValueError as e:
                raise FormatError(str(e), path, line_number)
            traj.append(timestamp, pose)
            last = timestamp
    return traj
