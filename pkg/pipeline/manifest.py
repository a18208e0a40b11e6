"""
Run Manifest
============
Everything that identifies one pipeline run: inputs, mode, config, seed and
output directory. A manifest plus its seed fully determines the outputs.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from config.pipeline_config import Config, load_config
from config.settings import DEFAULT_SEED
from config.validator import ConfigurationError
from synthetic.scene_writer import DETECTIONS_DIR

MODES = ("masked", "baseline", "gt-odometry")
SYNTHETIC_PREFIX = "synthetic:"


@dataclass(frozen=True)
class RunManifest:
    """
    Inputs and settings of one run.

    detections is a directory of per-frame detection files, or
    "synthetic:<scene>" to use the detections written with a synthetic
    render of <scene> (a scene JSON file or preset:<name>).
    """

    sequence_dir: str
    output_dir: str
    detections: Optional[str] = None
    mode: str = "masked"
    config_path: Optional[str] = None
    seed: int = DEFAULT_SEED
    overrides: Dict[str, str] = field(default_factory=dict)
    sequential: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"Unknown mode {self.mode!r}, expected one of {', '.join(MODES)}")
        if int(self.seed) < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")

    @property
    def sequence_path(self) -> Path:
        return Path(self.sequence_dir)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    @property
    def synthetic_scene(self) -> Optional[str]:
        if self.detections and self.detections.startswith(SYNTHETIC_PREFIX):
            return self.detections[len(SYNTHETIC_PREFIX):]
        return None

    @property
    def detections_path(self) -> Optional[Path]:
        """Directory holding detection files, after resolving synthetic sources."""
        if self.synthetic_scene is not None:
            return self.sequence_path / DETECTIONS_DIR
        return Path(self.detections) if self.detections else None

    def load_config(self) -> Config:
        cfg = load_config(self.config_path, self.overrides)
        if self.mode == "gt-odometry" and cfg.odometry_mode != "ground-truth":
            cfg = cfg.with_overrides({"odometry_mode": "ground-truth"})
        return cfg

    def stage_seed(self, stage_index: int) -> int:
        """Per-stage seed derived from the run seed."""
        return int(np.random.SeedSequence([int(self.seed), int(stage_index)]).generate_state(1)[0])

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "RunManifest":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"Unknown manifest keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunManifest":
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_dict(json.load(f))
        except FileNotFoundError:
            raise ConfigurationError(f"Manifest not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path
