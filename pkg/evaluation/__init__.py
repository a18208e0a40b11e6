"""
Evaluation Package
==================
Absolute trajectory error and trajectory plots.
"""

from evaluation.ate import EvalReport, InsufficientOverlapError, compute_ate
from evaluation.plotting import EmptyTrajectoryError, emit_plot

__all__ = ["EmptyTrajectoryError", "EvalReport", "InsufficientOverlapError", "compute_ate", "emit_plot"]
