"""
Trajectory Plots
================
Top-down SVG plot of ground truth against the aligned estimate.
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from dataset.trajectory_io import Trajectory  # noqa: E402
from geometry.pose import Pose, compose  # noqa: E402

GT_GID = "ground-truth"
EST_GID = "estimate"
SVG_SALT = "trajectory-plot"


class EmptyTrajectoryError(ValueError):
    """Nothing to draw."""


def _polyline(ax, positions, axes: Tuple[int, int], style: str, color: str, label: str, gid: str):
    xs = positions[:, axes[0]]
    ys = positions[:, axes[1]]
    marker = "o" if len(positions) == 1 else None
    (line,) = ax.plot(xs, ys, style, color=color, label=label, marker=marker)
    line.set_gid(gid)
    return line


def emit_plot(est: Trajectory, gt: Trajectory, path: Union[str, Path], alignment: Optional[Pose] = None,
              axes: Tuple[int, int] = (0, 1), labels: Sequence[str] = ("ground truth", "estimated"),
              title: Optional[str] = None) -> Path:
    """
    Draw both trajectories as polylines in one self-contained SVG.

    Args:
        est: Estimated trajectory
        gt: Ground-truth trajectory
        path: Output .svg file
        alignment: Transform applied to the estimate before drawing
        axes: World axes on the horizontal and vertical plot axes
        labels: Legend entries for ground truth and estimate
        title: Optional plot title

    Returns:
        The written path

    Raises:
        EmptyTrajectoryError: If either trajectory is empty
    """
    if len(est) == 0 or len(gt) == 0:
        raise EmptyTrajectoryError("cannot plot an empty trajectory")
    if alignment is not None:
        est = Trajectory((t, compose(alignment, pose)) for t, pose in est)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = "xyz"
    with plt.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6))
        try:
            _polyline(ax, gt.positions(), axes, ":", "grey", labels[0], GT_GID)
            _polyline(ax, est.positions(), axes, "-", "blue", labels[1], EST_GID)
            ax.set_aspect("equal", adjustable="datalim")
            ax.set_xlabel(f"{names[axes[0]]} [m]")
            ax.set_ylabel(f"{names[axes[1]]} [m]")
            if title:
                ax.set_title(title)
            ax.legend()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path
