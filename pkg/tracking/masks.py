"""
Frame Masks
===========
Binary mask helpers and the per-frame odometry/mapping exclusion masks.
"""

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np


class ShapeError(ValueError):
    """Raised when masks of different sizes are combined."""
    pass


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """
    Intersection over union of two binary masks; 0.0 when both are empty.

    Raises:
        ShapeError: If the masks differ in shape
    """
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")
    a = a.astype(bool, copy=False)
    b = b.astype(bool, copy=False)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union


def union_masks(masks: Iterable[np.ndarray], shape: Tuple[int, int]) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    for mask in masks:
        if mask.shape != shape:
            raise ShapeError(f"mask shape {mask.shape} does not match {shape}")
        out |= mask
    return out


@dataclass(frozen=True, eq=False)
class FrameMasks:
    """
    odometry_mask excludes pixels from pose estimation, mapping_mask from
    the map. Every odometry-masked pixel is also mapping-masked.
    """

    odometry_mask: np.ndarray
    mapping_mask: np.ndarray

    def __post_init__(self):
        if self.odometry_mask.shape != self.mapping_mask.shape:
            raise ShapeError("odometry and mapping masks differ in shape")
        if np.any(self.odometry_mask & ~self.mapping_mask):
            raise ValueError("odometry mask must be contained in the mapping mask")
        self.odometry_mask.setflags(write=False)
        self.mapping_mask.setflags(write=False)

    @classmethod
    def empty(cls, shape: Tuple[int, int]) -> "FrameMasks":
        return cls(np.zeros(shape, dtype=bool), np.zeros(shape, dtype=bool))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.mapping_mask.shape

    def counts(self) -> Tuple[int, int]:
        return int(np.count_nonzero(self.odometry_mask)), int(np.count_nonzero(self.mapping_mask))
