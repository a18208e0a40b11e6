"""
Geometry Package
================
Pinhole camera model, SE(3) poses and rigid least-squares alignment.
"""

from geometry.alignment import DegenerateGeometryError, alignment_residual, rigid_align
from geometry.camera import Intrinsics, InvalidDepthError, backproject, backproject_pixels, project
from geometry.pose import Pose, compose, invert, transform, transform_points

__all__ = [
    "DegenerateGeometryError",
    "Intrinsics",
    "InvalidDepthError",
    "Pose",
    "alignment_residual",
    "backproject",
    "backproject_pixels",
    "compose",
    "invert",
    "project",
    "rigid_align",
    "transform",
    "transform_points",
]
