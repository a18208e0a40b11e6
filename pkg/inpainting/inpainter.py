"""
Hole Filling
============
Fills the pixels removed by the mapping mask, in colour and in depth.

Pixels are visited in increasing distance from the mask boundary (distance
transform order). Colour takes a weighted local plane fit through the
already-known neighbours, so flat regions and smooth ramps continue across
the hole. Depth takes the 75th percentile of known neighbours, biased toward
the farther background the removed object was hiding.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import cv2
import numpy as np

from dataset.tum_reader import write_rgb
from utils.logger import setup_logger

DEPTH_PERCENTILE = 75.0
RIDGE = 1e-4

logger = setup_logger("Inpainter")


class AllMaskedError(ValueError):
    """Every pixel is masked, nothing to propagate from."""


@dataclass(frozen=True, eq=False)
class InpaintResult:
    rgb: np.ndarray
    depth: np.ndarray
    filled_pixel_count: int


def _check(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != image.shape[:2]:
        raise ValueError(f"mask {mask.shape} does not match image {image.shape[:2]}")
    return mask


def _offsets(radius: int) -> Tuple[np.ndarray, np.ndarray]:
    dy, dx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    keep = (dy != 0) | (dx != 0)
    return dy[keep], dx[keep]


def _propagate(values: np.ndarray, known: np.ndarray, mask: np.ndarray, radius: int,
               estimate: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """
    Fill masked pixels layer by layer from the boundary inward.

    Args:
        values: (H, W, C) float image
        known: Pixels usable as sources from the start
        mask: Pixels to fill
        radius: Neighbourhood radius
        estimate: f(neighbour values (n, K, C), neighbour known (n, K), dy, dx) -> (n, C)

    Returns:
        Boolean map of pixels that received a value (values updated in place)
    """
    h, w = mask.shape
    distance = cv2.distanceTransform(mask.astype(np.uint8), cv2.DIST_L2, 5)
    layer = np.ceil(distance).astype(int)
    dy, dx = _offsets(radius)

    channels = values.shape[2]
    padded = np.zeros((h + 2 * radius, w + 2 * radius, channels))
    padded[radius:radius + h, radius:radius + w] = values
    padded_known = np.zeros((h + 2 * radius, w + 2 * radius), dtype=bool)
    padded_known[radius:radius + h, radius:radius + w] = known & ~mask

    filled = np.zeros_like(mask)
    pending = mask.copy()
    while pending.any():
        progress = False
        for level in np.unique(layer[pending]):
            ys, xs = np.nonzero(pending & (layer == level))
            rows = ys[:, None] + radius + dy[None, :]
            cols = xs[:, None] + radius + dx[None, :]
            neighbour_known = padded_known[rows, cols]
            usable = neighbour_known.any(axis=1)
            if not usable.any():
                continue
            ys, xs = ys[usable], xs[usable]
            result = estimate(padded[rows[usable], cols[usable]], neighbour_known[usable], dy, dx)
            padded[ys + radius, xs + radius] = result
            padded_known[ys + radius, xs + radius] = True
            values[ys, xs] = result
            filled[ys, xs] = True
            pending[ys, xs] = False
            progress = True
        if not progress:
            break
    return filled


def _plane_estimate(neighbours: np.ndarray, known: np.ndarray, dy: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Intercept of a distance-weighted plane fit through the known neighbours."""
    weights = known / (dx.astype(float) ** 2 + dy.astype(float) ** 2)[None, :]
    design = np.stack([np.ones_like(dx, dtype=float), dx.astype(float), dy.astype(float)], axis=1)
    A = np.einsum("nk,ki,kj->nij", weights, design, design)
    b = np.einsum("nk,ki,nkc->nic", weights, design, neighbours)
    total = weights.sum(axis=1)
    A[:, 1, 1] += RIDGE * total
    A[:, 2, 2] += RIDGE * total
    solution = np.linalg.solve(A, b)
    return solution[:, 0, :]


def _percentile_estimate(neighbours: np.ndarray, known: np.ndarray, dy: np.ndarray, dx: np.ndarray) -> np.ndarray:
    samples = np.where(known, neighbours[:, :, 0], np.nan)
    return np.nanpercentile(samples, DEPTH_PERCENTILE, axis=1)[:, None]


def inpaint_color(rgb: np.ndarray, mask: np.ndarray, radius: int = 5) -> np.ndarray:
    """
    Fill masked colour pixels.

    Args:
        rgb: (H, W, 3) uint8 image
        mask: Boolean mask, True = fill
        radius: Neighbourhood radius in pixels

    Returns:
        New image; unmasked pixels are bit-identical to the input

    Raises:
        AllMaskedError: If the mask covers the whole image
    """
    mask = _check(rgb, mask)
    if mask.all():
        raise AllMaskedError("mask covers the entire image")
    out = rgb.copy()
    if not mask.any():
        return out

    values = rgb.astype(np.float64).reshape(rgb.shape[0], rgb.shape[1], -1)
    _propagate(values, np.ones(mask.shape, dtype=bool), mask, radius, _plane_estimate)
    filled = np.clip(np.rint(values), 0, 255).astype(rgb.dtype).reshape(rgb.shape)
    out[mask] = filled[mask]
    return out


def inpaint_depth(depth: np.ndarray, mask: np.ndarray, radius: int = 3) -> np.ndarray:
    """
    Fill masked depth pixels from valid boundary depth.

    Args:
        depth: Depth image, 0 = invalid (any numeric dtype)
        mask: Boolean mask, True = fill
        radius: Neighbourhood radius in pixels

    Returns:
        New depth image; masked pixels with no reachable valid depth stay 0
    """
    mask = _check(depth, mask)
    out = depth.copy()
    if not mask.any():
        return out

    values = depth.astype(np.float64)[:, :, None]
    filled = _propagate(values, depth > 0, mask, radius, _percentile_estimate)
    result = values[:, :, 0]
    if np.issubdtype(depth.dtype, np.integer):
        info = np.iinfo(depth.dtype)
        result = np.clip(np.rint(result), info.min, info.max)
    out[filled] = result[filled].astype(depth.dtype)
    return out


def inpaint_frame(rgb: np.ndarray, depth: np.ndarray, mask: np.ndarray, radius: int = 5,
                  depth_radius: int = 3) -> InpaintResult:
    """
    Fill colour and depth under one mask.

    Returns:
        InpaintResult; filled_pixel_count counts masked pixels that ended
        with valid depth
    """
    mask = _check(rgb, mask)
    filled_rgb = inpaint_color(rgb, mask, radius)
    filled_depth = inpaint_depth(depth, mask, depth_radius)
    count = int(np.count_nonzero(mask & (filled_depth > 0)))
    logger.debug(f"Inpainted {int(mask.sum())} pixels, {count} with depth")
    return InpaintResult(filled_rgb, filled_depth, count)


def dump_pair(directory: Union[str, Path], timestamp: float, before: np.ndarray, after: np.ndarray,
              mask: Optional[np.ndarray] = None) -> Path:
    """
    Write a side-by-side before/after PNG for inspection.

    The masked region is tinted red in the left half when a mask is given.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    left = before.copy()
    if mask is not None and mask.any():
        tint = np.array([255, 0, 0], dtype=np.float64)
        left[mask] = (0.5 * left[mask] + 0.5 * tint).astype(np.uint8)
    path = directory / f"{timestamp:.6f}.png"
    write_rgb(path, np.hstack([left, after]))
    return path
