"""
Scene Writer
============
Renders a SceneSpec to a TUM-format directory together with perfect
detections and ground-truth sidecars:

    rgb/ depth/ rgb.txt depth.txt groundtruth.txt camera.json scene.json
    detections/<timestamp>.txt
    objects.txt   "timestamp object_id class cx cy cz vx vy vz"
    volumes.txt   "object_id class min_x min_y min_z max_x max_y max_z"
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from dataset.detections import Detection, bbox_from_mask, write_detections
from dataset.trajectory_io import Trajectory, write_trajectory
from dataset.tum_reader import CAMERA_FILE, GROUNDTRUTH_FILE, write_depth, write_index, write_rgb
from synthetic.perturbation import perturb_frame
from synthetic.renderer import BoxRenderer, RenderedView
from synthetic.scene_spec import CLASS_IDS, NoiseSpec, SceneSpec
from utils.data_validator import FormatError
from utils.logger import setup_logger

OBJECTS_FILE = "objects.txt"
VOLUMES_FILE = "volumes.txt"
SCENE_FILE = "scene.json"
DETECTIONS_DIR = "detections"


@dataclass(frozen=True, eq=False)
class ObjectRecord:
    """Ground truth of one object in one frame. The mask is kept bit-packed."""

    timestamp: float
    object_id: int
    class_name: str
    center: np.ndarray
    velocity: np.ndarray
    packed_mask: Optional[np.ndarray] = None
    shape: Optional[Tuple[int, int]] = None

    @property
    def mask(self) -> Optional[np.ndarray]:
        if self.packed_mask is None or self.shape is None:
            return None
        count = self.shape[0] * self.shape[1]
        return np.unpackbits(self.packed_mask, count=count).astype(bool).reshape(self.shape)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))


@dataclass
class GroundTruth:
    """Everything known about a rendered sequence."""

    trajectory: Trajectory
    records: List[ObjectRecord] = field(default_factory=list)
    volumes: Dict[int, np.ndarray] = field(default_factory=dict)
    classes: Dict[int, str] = field(default_factory=dict)

    def records_for(self, object_id: int) -> List[ObjectRecord]:
        return [r for r in self.records if r.object_id == object_id]

    def record(self, timestamp: float, object_id: int) -> Optional[ObjectRecord]:
        for r in self.records:
            if r.object_id == object_id and abs(r.timestamp - timestamp) < 1e-6:
                return r
        return None

    def all_volumes(self) -> np.ndarray:
        """(M, 6) stacked boxes of every object."""
        if not self.volumes:
            return np.zeros((0, 6))
        return np.concatenate(list(self.volumes.values()), axis=0)


class SceneWriter:
    """
    Renders frames in parallel and writes them in timestamp order.
    """

    def __init__(self, scene: SceneSpec, noise: Optional[NoiseSpec] = None, max_workers: Optional[int] = None):
        self.scene = scene
        self.noise = noise or NoiseSpec()
        self.max_workers = max_workers
        self.renderer = BoxRenderer(scene)
        self.logger = setup_logger("SceneWriter")

    def _render(self, k: int) -> RenderedView:
        t = self.scene.frame_time(k)
        return self.renderer.render(self.scene.camera_path.pose_at(t), t)

    def iter_views(self) -> Iterator[Tuple[int, RenderedView]]:
        """Rendered views in frame order; rendering runs ahead on a thread pool."""
        frame_count = self.scene.frame_count
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            window = max(2, (self.max_workers or 4) * 2)
            pending = {}
            for k in range(min(window, frame_count)):
                pending[k] = executor.submit(self._render, k)
            for k in range(frame_count):
                view = pending.pop(k).result()
                ahead = k + window
                if ahead < frame_count:
                    pending[ahead] = executor.submit(self._render, ahead)
                yield k, view

    def write(self, out_dir: Union[str, Path]) -> GroundTruth:
        out_dir = Path(out_dir)
        try:
            (out_dir / "rgb").mkdir(parents=True, exist_ok=True)
            (out_dir / "depth").mkdir(parents=True, exist_ok=True)
            (out_dir / DETECTIONS_DIR).mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OSError(f"cannot create sequence directory {out_dir}: {e}")

        scene = self.scene
        intr = scene.intrinsics
        trajectory = Trajectory()
        records: List[ObjectRecord] = []
        boxes: Dict[int, List[Tuple[float, ...]]] = {obj.object_id: [] for obj in scene.objects}
        rgb_entries = []
        depth_entries = []
        noise_m = self.noise.depth_noise_mm / 1000.0

        self.logger.info(f"Rendering {scene.frame_count} frames of '{scene.name}' at {intr.width}x{intr.height}")
        for k, view in self.iter_views():
            t = scene.frame_time(k)
            timestamp = scene.frame_timestamp(k)
            name = f"{timestamp:.6f}.png"

            rng = np.random.default_rng(np.random.SeedSequence([self.noise.seed, k]))
            write_rgb(out_dir / "rgb" / name, view.rgb)
            write_depth(out_dir / "depth" / name, view.depth_raw(intr, noise_m, rng))
            rgb_entries.append((timestamp, f"rgb/{name}"))
            depth_entries.append((timestamp, f"depth/{name}"))
            trajectory.append(timestamp, scene.camera_path.pose_at(t))

            detections = []
            for obj in scene.objects:
                mask = view.object_masks[obj.object_id]
                box = obj.box_at(t)
                boxes[obj.object_id].append(tuple(np.concatenate([box.min_corner, box.max_corner]).round(9)))
                records.append(ObjectRecord(
                    timestamp=timestamp,
                    object_id=obj.object_id,
                    class_name=obj.class_name,
                    center=box.center,
                    velocity=obj.velocity_at(t),
                    packed_mask=np.packbits(mask.ravel()),
                    shape=mask.shape,
                ))
                bbox = bbox_from_mask(mask)
                if bbox is not None:
                    detections.append(Detection(CLASS_IDS[obj.class_name], obj.class_name, 1.0, bbox, mask))

            if self.noise.dropout > 0:
                detections = perturb_frame(detections, k, dropout=self.noise.dropout, seed=self.noise.seed)
            write_detections(out_dir / DETECTIONS_DIR, timestamp, detections, intr.width, intr.height)

        write_index(out_dir / "rgb.txt", rgb_entries, "color images")
        write_index(out_dir / "depth.txt", depth_entries, "depth maps")
        write_trajectory(trajectory, out_dir / GROUNDTRUTH_FILE, header="timestamp tx ty tz qx qy qz qw")
        intr.to_file(out_dir / CAMERA_FILE)
        scene.to_file(out_dir / SCENE_FILE)

        volumes = {object_id: _dedupe(rows) for object_id, rows in boxes.items()}
        classes = {obj.object_id: obj.class_name for obj in scene.objects}
        write_object_records(out_dir / OBJECTS_FILE, records)
        write_volumes(out_dir / VOLUMES_FILE, volumes, classes)

        self.logger.info(f"Wrote sequence to {out_dir}")
        return GroundTruth(trajectory=trajectory, records=records, volumes=volumes, classes=classes)


def _dedupe(rows: List[Tuple[float, ...]]) -> np.ndarray:
    """Unique boxes in first-seen order."""
    seen = {}
    for row in rows:
        seen.setdefault(row, None)
    return np.array(list(seen), dtype=np.float64).reshape(-1, 6)


def render_sequence(scene: SceneSpec, out_dir: Union[str, Path], noise: Optional[NoiseSpec] = None,
                    max_workers: Optional[int] = None) -> GroundTruth:
    """
    Render a scene to a TUM-format directory with detections and sidecars.

    Args:
        scene: Scene description
        out_dir: Destination directory (created if needed)
        noise: Depth noise and detection dropout, none by default
        max_workers: Render threads (default: executor's choice)

    Returns:
        GroundTruth of the written sequence
    """
    return SceneWriter(scene, noise, max_workers).write(out_dir)


def write_object_records(path: Path, records: List[ObjectRecord]) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        f.write("# timestamp object_id class cx cy cz vx vy vz\n")
        for r in records:
            values = " ".join(f"{v:.10g}" for v in list(r.center) + list(r.velocity))
            f.write(f"{r.timestamp:.6f} {r.object_id} {r.class_name} {values}\n")
    return path


def read_object_records(path: Union[str, Path]) -> List[ObjectRecord]:
    path = Path(path)
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 9:
                raise FormatError("expected 9 fields", path, line_number)
            try:
                values = [float(p) for p in parts[3:]]
                records.append(ObjectRecord(float(parts[0]), int(parts[1]), parts[2],
                                            np.array(values[:3]), np.array(values[3:])))
            except ValueError:
                raise FormatError(f"bad record {line!r}", path, line_number)
    return records


def write_volumes(path: Path, volumes: Dict[int, np.ndarray], classes: Dict[int, str]) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        f.write("# object_id class min_x min_y min_z max_x max_y max_z\n")
        for object_id, rows in volumes.items():
            for row in rows:
                f.write(f"{object_id} {classes[object_id]} " + " ".join(f"{v:.10g}" for v in row) + "\n")
    return path


def read_volumes(path: Union[str, Path]) -> Dict[int, np.ndarray]:
    """Per-object (M, 6) box arrays from a volumes.txt sidecar."""
    path = Path(path)
    rows: Dict[int, List[List[float]]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 8:
                raise FormatError("expected 8 fields", path, line_number)
            try:
                rows.setdefault(int(parts[0]), []).append([float(p) for p in parts[2:]])
            except ValueError:
                raise FormatError(f"bad volume {line!r}", path, line_number)
    return {object_id: np.array(values, dtype=np.float64) for object_id, values in rows.items()}
