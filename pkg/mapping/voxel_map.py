"""
Voxel Map
=========
Sparse voxel grid accumulating the running mean position and colour of
every static point inserted, plus the contamination metric against
ground-truth dynamic volumes and ASCII PLY export.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np

from geometry.camera import Intrinsics, backproject_pixels
from geometry.pose import Pose, transform_points
from utils.data_validator import FormatError
from utils.logger import setup_logger

# Voxel indices are packed into one int64 key, 21 bits per axis
INDEX_BITS = 21
INDEX_OFFSET = 1 << (INDEX_BITS - 1)
INDEX_MASK = (1 << INDEX_BITS) - 1
CHUNK = 4096


class EmptyMapError(ValueError):
    """The map holds no points."""


@dataclass(frozen=True)
class ContaminationReport:
    total_points: int
    contaminated_points: int
    fraction: float

    def summary_text(self) -> str:
        return (f"map points: {self.total_points}\n"
                f"contaminated: {self.contaminated_points}\n"
                f"fraction: {self.fraction:.6f}\n")


def _pack(index: np.ndarray) -> np.ndarray:
    shifted = (index + INDEX_OFFSET).astype(np.int64)
    return (shifted[:, 0] << (2 * INDEX_BITS)) | (shifted[:, 1] << INDEX_BITS) | shifted[:, 2]


def _unpack(keys: np.ndarray) -> np.ndarray:
    i = (keys >> (2 * INDEX_BITS)) & INDEX_MASK
    j = (keys >> INDEX_BITS) & INDEX_MASK
    k = keys & INDEX_MASK
    return np.stack([i, j, k], axis=1) - INDEX_OFFSET


class VoxelMap:
    """
    Sparse voxel map with one cell per integer voxel index.

    Cells keep position and colour sums and a hit count, so the stored mean
    does not depend on insertion order.
    """

    def __init__(self, voxel_size: float = 0.05):
        if voxel_size <= 0:
            raise ValueError(f"voxel_size must be positive, got {voxel_size}")
        self.voxel_size = float(voxel_size)
        self.keys = np.zeros(0, dtype=np.int64)
        self.position_sums = np.zeros((0, 3))
        self.color_sums = np.zeros((0, 3))
        self.hits = np.zeros(0, dtype=np.int64)
        self.logger = setup_logger("VoxelMap")

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def cell_count(self) -> int:
        return len(self.keys)

    @property
    def points(self) -> np.ndarray:
        """(M, 3) mean point per cell, ordered by voxel key."""
        return self.position_sums / self.hits[:, None]

    @property
    def colors(self) -> np.ndarray:
        """(M, 3) mean uint8 colour per cell."""
        if len(self.keys) == 0:
            return np.zeros((0, 3), dtype=np.uint8)
        return np.clip(np.rint(self.color_sums / self.hits[:, None]), 0, 255).astype(np.uint8)

    @property
    def indices(self) -> np.ndarray:
        return _unpack(self.keys)

    def cells(self) -> Dict[tuple, tuple]:
        """Voxel index -> (mean point, mean colour, hits)."""
        return {tuple(int(c) for c in idx): (p, c, int(n))
                for idx, p, c, n in zip(self.indices, self.points, self.colors, self.hits)}

    def add_points(self, points: np.ndarray, colors: np.ndarray) -> int:
        """
        Merge world points into their cells.

        Args:
            points: (N, 3) world points
            colors: (N, 3) colours

        Returns:
            Number of points merged
        """
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        colors = np.asarray(colors, dtype=np.float64).reshape(-1, 3)
        if len(points) == 0:
            return 0
        keys = _pack(np.floor(points / self.voxel_size).astype(np.int64))

        all_keys = np.concatenate([self.keys, keys])
        merged, inverse = np.unique(all_keys, return_inverse=True)
        inverse = inverse.ravel()
        count = len(merged)
        sums = np.zeros((count, 3))
        csums = np.zeros((count, 3))
        hits = np.zeros(count, dtype=np.int64)

        old = inverse[:len(self.keys)]
        sums[old] = self.position_sums
        csums[old] = self.color_sums
        hits[old] = self.hits
        new = inverse[len(self.keys):]
        np.add.at(sums, new, points)
        np.add.at(csums, new, colors)
        np.add.at(hits, new, 1)

        self.keys, self.position_sums, self.color_sums, self.hits = merged, sums, csums, hits
        return len(points)


def insert_frame(vmap: VoxelMap, rgb: np.ndarray, depth: np.ndarray, intr: Intrinsics, pose: Pose,
                 mapping_mask: Optional[np.ndarray] = None, stride: int = 4) -> VoxelMap:
    """
    Back-project every stride-th valid, unmasked depth pixel into the map.

    Args:
        vmap: Map to update
        rgb: (H, W, 3) colour image
        depth: Raw depth image
        intr: Camera intrinsics
        pose: Camera-to-world pose
        mapping_mask: Boolean mask, True = excluded from the map
        stride: Pixel subsampling step (>= 1)

    Returns:
        The updated map
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    depth_m = intr.depth_to_meters(depth[::stride, ::stride])
    valid = depth_m > 0
    if mapping_mask is not None:
        valid &= ~np.asarray(mapping_mask, dtype=bool)[::stride, ::stride]
    vs, us = np.nonzero(valid)
    if len(vs) == 0:
        return vmap
    vs = vs * stride
    us = us * stride
    points = transform_points(pose, backproject_pixels(us, vs, depth_m[valid], intr))
    vmap.add_points(points, rgb[vs, us])
    vmap.logger.debug(f"Inserted {len(vs)} points, map has {vmap.cell_count} cells")
    return vmap


def points_in_volumes(points: np.ndarray, volumes: np.ndarray, margin: float = 0.0) -> np.ndarray:
    """Boolean flag per point: inside any (min xyz, max xyz) box grown by margin."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    volumes = np.asarray(volumes, dtype=np.float64).reshape(-1, 6)
    inside = np.zeros(len(points), dtype=bool)
    if len(volumes) == 0 or len(points) == 0:
        return inside
    lo = volumes[:, :3] - margin
    hi = volumes[:, 3:] + margin
    for start in range(0, len(points), CHUNK):
        chunk = points[start:start + CHUNK, None, :]
        hit = np.all((chunk >= lo[None]) & (chunk <= hi[None]), axis=2)
        inside[start:start + CHUNK] = hit.any(axis=1)
    return inside


def contamination(vmap: VoxelMap, gt_volumes: Union[np.ndarray, Mapping[int, np.ndarray]],
                  margin: float = 0.0) -> ContaminationReport:
    """
    Share of map points lying inside the swept volume of any dynamic object.

    Args:
        vmap: Map to score
        gt_volumes: (M, 6) boxes or a mapping object id -> (M, 6) boxes
        margin: Box growth in meters

    Returns:
        ContaminationReport (fraction 0 for an empty map)
    """
    if isinstance(gt_volumes, Mapping):
        parts = [np.asarray(v).reshape(-1, 6) for v in gt_volumes.values()]
        boxes = np.concatenate(parts) if parts else np.zeros((0, 6))
    else:
        boxes = np.asarray(gt_volumes).reshape(-1, 6)
    total = vmap.cell_count
    if total == 0:
        return ContaminationReport(0, 0, 0.0)
    contaminated = int(points_in_volumes(vmap.points, boxes, margin).sum())
    return ContaminationReport(total, contaminated, contaminated / total)


def export_ply(vmap: VoxelMap, path: Union[str, Path]) -> Path:
    """
    Write the map as ASCII PLY, one vertex per cell.

    Raises:
        EmptyMapError: If the map has no cells
    """
    if vmap.cell_count == 0:
        raise EmptyMapError("cannot export an empty map")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points = vmap.points
    colors = vmap.colors
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {len(points)}\n")
        f.write("property float x\nproperty float y\nproperty float z\n")
        f.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        f.write("end_header\n")
        for p, c in zip(points, colors):
            f.write(f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f} {c[0]} {c[1]} {c[2]}\n")
    vmap.logger.info(f"Wrote {len(points)} map points to {path}")
    return path


def read_ply(path: Union[str, Path]):
    """
    Parse an ASCII PLY written by export_ply.

    Returns:
        (points (N, 3), colors (N, 3) uint8)

    Raises:
        FormatError: On a malformed header or vertex count mismatch
    """
    path = Path(path)
    with open(path, "r", encoding="ascii") as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != "ply":
        raise FormatError("missing ply magic", path, 1)
    count = None
    end = None
    for number, line in enumerate(lines, start=1):
        if line.startswith("element vertex"):
            count = int(line.split()[2])
        if line == "end_header":
            end = number
            break
    if count is None or end is None:
        raise FormatError("incomplete PLY header", path)
    body = [line for line in lines[end:] if line.strip()]
    if len(body) != count:
        raise FormatError(f"header declares {count} vertices, found {len(body)}", path)
    if count == 0:
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.uint8)
    table = np.array([line.split() for line in body], dtype=np.float64)
    if table.shape[1] != 6:
        raise FormatError(f"expected 6 values per vertex, got {table.shape[1]}", path)
    return table[:, :3], table[:, 3:].astype(np.uint8)
