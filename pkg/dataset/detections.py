"""
Detection Files
===============
Per-frame instance segmentation results stored as text, one file per RGB
timestamp ("<timestamp>.txt" with 6 decimals).

File layout:
    W H N
    class_id class_name score u_min v_min u_max v_max     (N times, each
    run-length counts                                      followed by its mask)

Run-length counts alternate zero and one runs over row-major pixels, start
with a zero run and sum to W*H. Bounding boxes are half-open: u_max and
v_max are exclusive.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from config.settings import MAX_DT
from utils.data_validator import FormatError
from utils.logger import setup_logger


@dataclass(frozen=True, eq=False)
class Detection:
    """One segmented instance."""

    class_id: int
    class_name: str
    score: float
    bbox: Tuple[int, int, int, int]
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
        height, width = mask.shape
        u_min, v_min, u_max, v_max = (int(c) for c in self.bbox)
        if not (0 <= u_min < u_max <= width and 0 <= v_min < v_max <= height):
            raise ValueError(f"bbox {self.bbox} invalid for a {width}x{height} mask")
        if not 0.0 <= float(self.score) <= 1.0:
            raise ValueError(f"score must be within [0, 1], got {self.score}")
        if not self.class_name or any(ch.isspace() for ch in self.class_name):
            raise ValueError(f"class name must be a single word, got {self.class_name!r}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "bbox", (u_min, v_min, u_max, v_max))
        object.__setattr__(self, "score", float(self.score))
        object.__setattr__(self, "class_id", int(self.class_id))

    @property
    def center(self) -> Tuple[float, float]:
        """Continuous bbox center in pixels."""
        u_min, v_min, u_max, v_max = self.bbox
        return (u_min + u_max) / 2.0, (v_min + v_max) / 2.0

    @property
    def pixel_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def with_mask(self, mask: np.ndarray) -> Optional["Detection"]:
        """Copy with a new mask and a bbox fitted to it; None if the mask is empty."""
        bbox = bbox_from_mask(mask)
        if bbox is None:
            return None
        return Detection(self.class_id, self.class_name, self.score, bbox, mask)

    def with_score(self, score: float) -> "Detection":
        return Detection(self.class_id, self.class_name, score, self.bbox, self.mask)


def bbox_from_mask(mask: np.ndarray) -> Optional[Tuple[int, int, int, int]]:
    """Tight half-open bbox around the set pixels, or None for an empty mask."""
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        return None
    return int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1


def encode_rle(mask: np.ndarray) -> List[int]:
    """
    Run-length encode a binary mask in row-major order.

    Returns:
        Alternating zero/one run lengths starting with zeros
    """
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        return [0]
    change_points = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    boundaries = np.concatenate(([0], change_points, [flat.size]))
    runs = np.diff(boundaries).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def decode_rle(counts: Iterable[int], width: int, height: int) -> np.ndarray:
    """
    Decode run-length counts to an (height, width) boolean mask.

    Raises:
        ValueError: If the counts are negative or do not sum to width*height
    """
    counts = np.asarray(list(counts), dtype=np.int64)
    if counts.size == 0:
        raise ValueError("empty run-length payload")
    if np.any(counts < 0):
        raise ValueError("negative run length")
    total = int(counts.sum())
    if total != width * height:
        raise ValueError(f"run lengths sum to {total}, expected {width * height}")
    values = (np.arange(counts.size) % 2).astype(bool)
    return np.repeat(values, counts).reshape(height, width)


def detection_filename(timestamp: float) -> str:
    return f"{timestamp:.6f}.txt"


def write_detection_file(path: Union[str, Path], detections: List[Detection], width: int, height: int) -> Path:
    """Write one frame's detections."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{width} {height} {len(detections)}\n")
        for det in detections:
            if det.mask.shape != (height, width):
                raise ValueError(f"mask shape {det.mask.shape} does not match {width}x{height}")
            u_min, v_min, u_max, v_max = det.bbox
            f.write(f"{det.class_id} {det.class_name} {det.score:.6f} {u_min} {v_min} {u_max} {v_max}\n")
            f.write(" ".join(str(c) for c in encode_rle(det.mask)) + "\n")
    return path


def read_detection_file(path: Union[str, Path]) -> List[Detection]:
    """
    Parse one detection file.

    Raises:
        FormatError: With the offending line number
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()

    # Blank trailing lines are tolerated, an entirely empty file means no detections
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        return []

    header = lines[0].split()
    try:
        width, height, count = (int(x) for x in header)
    except ValueError:
        raise FormatError(f"expected header 'W H N', got {lines[0]!r}", path, 1)
    if width <= 0 or height <= 0 or count < 0:
        raise FormatError(f"invalid header values {lines[0]!r}", path, 1)
    if len(lines) != 1 + 2 * count:
        raise FormatError(f"header announces {count} instances but file has {len(lines) - 1} body lines",
                          path, len(lines))

    detections = []
    for k in range(count):
        instance_line = 2 + 2 * k
        rle_line = instance_line + 1
        parts = lines[instance_line - 1].split()
        if len(parts) != 7:
            raise FormatError("expected 'class_id class_name score u_min v_min u_max v_max'", path, instance_line)
        try:
            class_id = int(parts[0])
            score = float(parts[2])
            bbox = tuple(int(x) for x in parts[3:7])
        except ValueError:
            raise FormatError(f"bad instance record {lines[instance_line - 1]!r}", path, instance_line)

        try:
            counts = [int(x) for x in lines[rle_line - 1].split()]
            mask = decode_rle(counts, width, height)
        except ValueError as e:
            raise FormatError(f"bad mask payload: {e}", path, rle_line)

        try:
            detections.append(Detection(class_id, parts[1], score, bbox, mask))
        except ValueError as e:
            raise FormatError(str(e), path, instance_line)
    return detections


class DetectionStore:
    """
    Directory of per-frame detection files indexed by timestamp.
    """

    def __init__(self, directory: Union[str, Path], max_dt: float = MAX_DT):
        self.directory = Path(directory)
        self.max_dt = max_dt
        self.logger = setup_logger("DetectionStore")
        if not self.directory.is_dir():
            raise FormatError("detections directory not found", self.directory)

        index: Dict[float, Path] = {}
        for path in self.directory.glob("*.txt"):
            try:
                index[float(path.stem)] = path
            except ValueError:
                self.logger.debug(f"Ignoring {path.name}: name is not a timestamp")
        self.timestamps = np.array(sorted(index), dtype=np.float64)
        self.paths = [index[t] for t in self.timestamps]

    def __len__(self) -> int:
        return len(self.paths)

    def nearest(self, timestamp: float) -> Optional[Path]:
        """Detection file closest to timestamp within max_dt, if any."""
        if self.timestamps.size == 0:
            return None
        pos = int(np.searchsorted(self.timestamps, timestamp))
        best = None
        best_dt = None
        for k in (pos - 1, pos):
            if 0 <= k < self.timestamps.size:
                dt = abs(self.timestamps[k] - timestamp)
                if best_dt is None or dt < best_dt:
                    best, best_dt = k, dt
        if best_dt is None or best_dt > self.max_dt + 1e-9:
            return None
        return self.paths[best]

    def load(self, timestamp: float) -> List[Detection]:
        path = self.nearest(timestamp)
        if path is None:
            return []
        return read_detection_file(path)


def load_detections(directory: Union[str, Path], timestamp: float, max_dt: float = MAX_DT) -> List[Detection]:
    """
    Detections of the file nearest to timestamp within max_dt.

    Args:
        directory: Directory of "<timestamp>.txt" files
        timestamp: RGB timestamp in seconds
        max_dt: Association tolerance in seconds

    Returns:
        Decoded detections, empty if no file is close enough
    """
    return DetectionStore(directory, max_dt=max_dt).load(timestamp)


def write_detections(directory: Union[str, Path], timestamp: float, detections: List[Detection],
                     width: int, height: int) -> Path:
    """Write a frame's detections as <directory>/<timestamp>.txt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return write_detection_file(directory / detection_filename(timestamp), detections, width, height)
