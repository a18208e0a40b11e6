"""
TUM Sequence Reader
===================
Lazy reader for TUM RGB-D directories (rgb.txt, depth.txt, rgb/, depth/).
Colour and depth images are paired by nearest timestamp; depth stays in raw
16-bit units until a geometric use site converts it.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import cv2
import numpy as np

from config.settings import DEFAULT_INTRINSICS, MAX_DT
from geometry.camera import Intrinsics
from utils.data_validator import FormatError, FrameReadError, OrderViolationError, validate_frame_data
from utils.logger import setup_logger

# Small slack for timestamps that went through 6-decimal text
TIMESTAMP_TOLERANCE = 1e-9

CAMERA_FILE = "camera.json"
GROUNDTRUTH_FILE = "groundtruth.txt"


@dataclass(frozen=True, eq=False)
class Frame:
    """One timestamped RGB + raw depth pair."""

    timestamp: float
    rgb: np.ndarray
    depth: np.ndarray
    intrinsics: Intrinsics
    rgb_path: Optional[Path] = field(default=None, compare=False)
    depth_path: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        validate_frame_data(self.timestamp, self.rgb, self.depth, self.intrinsics).raise_on_errors()
        self.rgb.setflags(write=False)
        self.depth.setflags(write=False)

    @property
    def gray(self) -> np.ndarray:
        return cv2.cvtColor(np.ascontiguousarray(self.rgb), cv2.COLOR_RGB2GRAY)

    @property
    def depth_m(self) -> np.ndarray:
        return self.intrinsics.depth_to_meters(self.depth)


@dataclass
class LoadReport:
    """Counts gathered while pairing a sequence."""

    rgb_entries: int = 0
    depth_entries: int = 0
    paired: int = 0
    skipped: int = 0
    yielded: int = 0
    skipped_timestamps: List[float] = field(default_factory=list)

    def summary(self) -> str:
        return (f"{self.rgb_entries} rgb entries, {self.depth_entries} depth entries, "
                f"{self.paired} paired, {self.skipped} skipped, {self.yielded} yielded")


def read_index(path: Union[str, Path]) -> List[Tuple[float, str]]:
    """
    Parse a TUM index file of "timestamp filename" lines.

    Args:
        path: rgb.txt or depth.txt

    Returns:
        (timestamp, relative filename) entries in file order

    Raises:
        FormatError: Missing file or malformed line
        OrderViolationError: Timestamps not strictly increasing
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError("index file not found", path)

    entries: List[Tuple[float, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise FormatError(f"expected 'timestamp filename', got {line!r}", path, line_number)
            try:
                timestamp = float(parts[0])
            except ValueError:
                raise FormatError(f"bad timestamp {parts[0]!r}", path, line_number)
            if not np.isfinite(timestamp) or timestamp < 0:
                raise FormatError(f"timestamp must be finite and non-negative, got {parts[0]!r}", path, line_number)
            if entries and timestamp <= entries[-1][0]:
                raise OrderViolationError(f"timestamp {parts[0]} does not increase", path, line_number)
            entries.append((timestamp, parts[1]))
    return entries


def write_index(path: Union[str, Path], entries: Sequence[Tuple[float, str]], title: str) -> Path:
    """Write a TUM index file with the usual three comment lines."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# {title}\n")
        f.write("# file: synthetic sequence\n")
        f.write("# timestamp filename\n")
        for timestamp, name in entries:
            f.write(f"{timestamp:.6f} {name}\n")
    return path


def associate_timestamps(a: Sequence[float], b: Sequence[float], max_dt: float = MAX_DT) -> List[Tuple[int, int]]:
    """
    Greedy nearest-first pairing of two sorted timestamp lists.

    Candidate pairs within max_dt are taken in order of increasing |t_a - t_b|;
    each element is used at most once. Ties are broken by the pair's
    (earlier, later) timestamps so that swapping a and b gives the transposed
    result.

    Args:
        a: Ascending timestamps
        b: Ascending timestamps
        max_dt: Largest accepted difference in seconds

    Returns:
        (index into a, index into b) pairs sorted by t_a
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        return []

    limit = max_dt + TIMESTAMP_TOLERANCE
    lo = np.searchsorted(b, a - limit, side="left")
    hi = np.searchsorted(b, a + limit, side="right")

    candidates = []
    for i in range(a.size):
        for j in range(lo[i], hi[i]):
            diff = abs(a[i] - b[j])
            if diff <= limit:
                candidates.append((diff, min(a[i], b[j]), max(a[i], b[j]), i, j))
    candidates.sort()

    used_a = set()
    used_b = set()
    pairs = []
    for _, _, _, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((int(i), int(j)))

    pairs.sort()
    return pairs


def resolve_intrinsics(sequence_dir: Path, intrinsics: Optional[Intrinsics] = None) -> Intrinsics:
    """Explicit argument, then camera.json in the sequence, then the default camera."""
    if intrinsics is not None:
        return intrinsics
    camera_file = sequence_dir / CAMERA_FILE
    if camera_file.is_file():
        return Intrinsics.from_file(camera_file)
    return Intrinsics.from_dict(DEFAULT_INTRINSICS)


def read_rgb(path: Path) -> np.ndarray:
    image = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if image is None:
        raise FrameReadError(path)
    return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)


def read_depth(path: Path) -> np.ndarray:
    image = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if image is None:
        raise FrameReadError(path)
    if image.ndim != 2 or image.dtype != np.uint16:
        raise FrameReadError(path, f"depth must be single-channel 16-bit, got {image.dtype} {image.shape}")
    return image


def write_rgb(path: Path, rgb: np.ndarray) -> None:
    if not cv2.imwrite(str(path), cv2.cvtColor(rgb, cv2.COLOR_RGB2BGR)):
        raise OSError(f"could not write {path}")


def write_depth(path: Path, depth: np.ndarray) -> None:
    if not cv2.imwrite(str(path), depth.astype(np.uint16)):
        raise OSError(f"could not write {path}")


class SequenceReader:
    """
    Iterable over the frames of one sequence, decoded lazily.

    Iterating twice re-reads the images from disk.
    """

    def __init__(self, sequence_dir: Union[str, Path], intrinsics: Optional[Intrinsics] = None,
                 max_dt: float = MAX_DT):
        self.sequence_dir = Path(sequence_dir)
        self.logger = setup_logger("SequenceReader")
        self.intrinsics = resolve_intrinsics(self.sequence_dir, intrinsics)
        self.max_dt = max_dt

        rgb_entries = read_index(self.sequence_dir / "rgb.txt")
        depth_entries = read_index(self.sequence_dir / "depth.txt")
        pairs = associate_timestamps([t for t, _ in rgb_entries], [t for t, _ in depth_entries], max_dt)

        self.entries: List[Tuple[float, Path, Path]] = [
            (rgb_entries[i][0], self.sequence_dir / rgb_entries[i][1], self.sequence_dir / depth_entries[j][1])
            for i, j in pairs
        ]
        paired_rgb = {i for i, _ in pairs}
        self.report = LoadReport(
            rgb_entries=len(rgb_entries),
            depth_entries=len(depth_entries),
            paired=len(pairs),
            skipped=len(rgb_entries) - len(pairs),
            skipped_timestamps=[t for k, (t, _) in enumerate(rgb_entries) if k not in paired_rgb],
        )
        if self.report.skipped:
            self.logger.warning(f"{self.report.skipped} rgb frames have no depth within {max_dt}s and are skipped")
        self.logger.debug(f"Indexed {self.sequence_dir}: {self.report.summary()}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def timestamps(self) -> List[float]:
        return [t for t, _, _ in self.entries]

    @property
    def groundtruth_path(self) -> Path:
        return self.sequence_dir / GROUNDTRUTH_FILE

    def has_groundtruth(self) -> bool:
        return self.groundtruth_path.is_file()

    def read_frame(self, index: int) -> Frame:
        timestamp, rgb_path, depth_path = self.entries[index]
        return Frame(
            timestamp=timestamp,
            rgb=read_rgb(rgb_path),
            depth=read_depth(depth_path),
            intrinsics=self.intrinsics,
            rgb_path=rgb_path,
            depth_path=depth_path,
        )

    def __iter__(self) -> Iterator[Frame]:
        self.report.yielded = 0
        for index in range(len(self.entries)):
            frame = self.read_frame(index)
            self.report.yielded += 1
            yield frame


def load_sequence(sequence_dir: Union[str, Path], intrinsics: Optional[Intrinsics] = None,
                  max_dt: float = MAX_DT) -> SequenceReader:
    """
    Open a TUM-format sequence directory.

    Args:
        sequence_dir: Directory holding rgb.txt and depth.txt
        intrinsics: Camera override; otherwise camera.json or the default camera
        max_dt: RGB/depth association tolerance in seconds

    Returns:
        Lazy SequenceReader yielding Frames in timestamp order
    """
    return SequenceReader(sequence_dir, intrinsics=intrinsics, max_dt=max_dt)
