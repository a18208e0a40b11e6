"""
Absolute Trajectory Error
=========================
Associates estimated and ground-truth poses by timestamp, rigidly aligns
the estimated positions onto the ground truth (no scale) and reports the
translational error statistics.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from config.settings import MAX_DT
from dataset.trajectory_io import Trajectory
from dataset.tum_reader import associate_timestamps
from geometry.alignment import DegenerateGeometryError, rigid_align
from geometry.pose import Pose, compose
from utils.logger import setup_logger

logger = setup_logger("ATE")


class InsufficientOverlapError(ValueError):
    """Fewer than three pose pairs could be associated."""


@dataclass
class EvalReport:
    ate_rmse: float
    ate_mean: float
    ate_median: float
    ate_max: float
    ate_min: float
    ate_std: float
    pair_count: int
    errors: List[Tuple[float, float]] = field(default_factory=list)
    alignment: Pose = field(default_factory=Pose.identity)
    aligned: Trajectory = field(default_factory=Trajectory)

    def summary_text(self) -> str:
        """Benchmark-style key/value summary."""
        return (
            f"compared_pose_pairs {self.pair_count} pairs\n"
            f"absolute_translational_error.rmse {self.ate_rmse:.6f} m\n"
            f"absolute_translational_error.mean {self.ate_mean:.6f} m\n"
            f"absolute_translational_error.median {self.ate_median:.6f} m\n"
            f"absolute_translational_error.std {self.ate_std:.6f} m\n"
            f"absolute_translational_error.min {self.ate_min:.6f} m\n"
            f"absolute_translational_error.max {self.ate_max:.6f} m\n"
        )

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.errors, columns=["timestamp", "error"])

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False, float_format="%.6f")
        return path

    def write_summary(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.summary_text(), encoding="utf-8")
        return path


def _align(src: np.ndarray, dst: np.ndarray) -> Pose:
    """Rigid alignment; a pure translation when the estimate has no usable spread."""
    try:
        return rigid_align(src, dst)
    except DegenerateGeometryError:
        logger.warning("Estimated positions are degenerate, aligning translation only")
        return Pose(np.array([0.0, 0.0, 0.0, 1.0]), dst.mean(axis=0) - src.mean(axis=0))


def compute_ate(est: Trajectory, gt: Trajectory, max_dt: float = MAX_DT) -> EvalReport:
    """
    ATE of est against gt.

    Args:
        est: Estimated trajectory
        gt: Ground-truth trajectory
        max_dt: Largest timestamp difference for a pair (seconds)

    Returns:
        EvalReport with statistics, per-pair errors and the aligned estimate

    Raises:
        InsufficientOverlapError: If fewer than 3 pairs associate
    """
    if len(est) == 0 or len(gt) == 0:
        raise InsufficientOverlapError("trajectory is empty")
    pairs = associate_timestamps(est.timestamps, gt.timestamps, max_dt)
    if len(pairs) < 3:
        raise InsufficientOverlapError(f"only {len(pairs)} pose pairs within {max_dt}s")

    est_idx = np.array([i for i, _ in pairs])
    gt_idx = np.array([j for _, j in pairs])
    est_xyz = est.positions()[est_idx]
    gt_xyz = gt.positions()[gt_idx]

    alignment = _align(est_xyz, gt_xyz)
    aligned_xyz = est_xyz @ alignment.rotation_matrix.T + alignment.translation
    errors = np.linalg.norm(gt_xyz - aligned_xyz, axis=1)

    aligned = Trajectory((t, compose(alignment, pose)) for t, pose in est)
    stamps = est.timestamps[est_idx]
    return EvalReport(
        ate_rmse=float(np.sqrt(np.mean(errors ** 2))),
        ate_mean=float(np.mean(errors)),
        ate_median=float(np.median(errors)),
        ate_max=float(np.max(errors)),
        ate_min=float(np.min(errors)),
        ate_std=float(np.std(errors)),
        pair_count=len(pairs),
        errors=[(float(t), float(e)) for t, e in zip(stamps, errors)],
        alignment=alignment,
        aligned=aligned,
    )
