"""
Camera Model
============
Pinhole intrinsics with back-projection and projection helpers.
Depth 0 means "no measurement" everywhere in the pipeline.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np

from config.validator import ConfigurationError


class InvalidDepthError(ValueError):
    """Raised when a non-positive depth is back-projected."""
    pass


@dataclass(frozen=True)
class Intrinsics:
    """
    Pinhole camera parameters.

    Args:
        fx, fy: Focal lengths in pixels
        cx, cy: Principal point in pixels
        width, height: Image size in pixels
        depth_scale: Raw depth units per meter (5000 for TUM 16-bit depth)
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    depth_scale: float = 5000.0

    def __post_init__(self):
        errors = []
        if not self.fx > 0 or not self.fy > 0:
            errors.append("focal lengths must be positive")
        if not 0 < self.cx < self.width:
            errors.append(f"cx={self.cx} must lie inside (0, {self.width})")
        if not 0 < self.cy < self.height:
            errors.append(f"cy={self.cy} must lie inside (0, {self.height})")
        if not self.depth_scale > 0:
            errors.append("depth_scale must be positive")
        if errors:
            raise ConfigurationError("Invalid intrinsics: " + "; ".join(errors))

    @property
    def K(self) -> np.ndarray:
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])

    @property
    def shape(self) -> Tuple[int, int]:
        """(height, width) as used by numpy image arrays."""
        return self.height, self.width

    def scaled(self, factor: float) -> "Intrinsics":
        """Intrinsics for an image resized by factor."""
        return Intrinsics(
            fx=self.fx * factor,
            fy=self.fy * factor,
            cx=self.cx * factor,
            cy=self.cy * factor,
            width=int(round(self.width * factor)),
            height=int(round(self.height * factor)),
            depth_scale=self.depth_scale,
        )

    def depth_to_meters(self, depth_raw: np.ndarray) -> np.ndarray:
        """Convert raw depth units to float meters (0 stays 0)."""
        return np.asarray(depth_raw, dtype=np.float64) / self.depth_scale

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Intrinsics":
        try:
            return cls(
                fx=float(data["fx"]),
                fy=float(data["fy"]),
                cx=float(data["cx"]),
                cy=float(data["cy"]),
                width=int(data["width"]),
                height=int(data["height"]),
                depth_scale=float(data.get("depth_scale", 5000.0)),
            )
        except KeyError as e:
            raise ConfigurationError(f"Intrinsics missing field {e.args[0]!r}")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Intrinsics":
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_dict(json.load(f))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")
        return path


def backproject(pixel, depth: float, intr: Intrinsics) -> np.ndarray:
    """
    Lift a pixel with metric depth to a camera-frame point.

    Args:
        pixel: (u, v) in pixels
        depth: Depth along the optical axis in meters
        intr: Camera intrinsics

    Returns:
        (x, y, z) in the camera frame

    Raises:
        InvalidDepthError: If depth is not positive
    """
    if not depth > 0:
        raise InvalidDepthError(f"cannot back-project depth {depth!r}")
    u, v = float(pixel[0]), float(pixel[1])
    return np.array([(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, float(depth)])


def project(point, intr: Intrinsics) -> np.ndarray:
    """
    Project a camera-frame point to pixel coordinates.

    Raises:
        InvalidDepthError: If the point is not in front of the camera
    """
    x, y, z = (float(c) for c in point)
    if not z > 0:
        raise InvalidDepthError(f"point with z={z!r} is behind the camera")
    return np.array([intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy])


def backproject_pixels(u: np.ndarray, v: np.ndarray, depth_m: np.ndarray, intr: Intrinsics) -> np.ndarray:
    """
    Vectorised back-projection of pixel arrays.

    Args:
        u, v: Pixel coordinates, any matching shape
        depth_m: Metric depth per pixel (callers drop zeros first)
        intr: Camera intrinsics

    Returns:
        (N, 3) camera-frame points
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    z = np.asarray(depth_m, dtype=np.float64).ravel()
    x = (u - intr.cx) / intr.fx * z
    y = (v - intr.cy) / intr.fy * z
    return np.stack([x, y, z], axis=1)
