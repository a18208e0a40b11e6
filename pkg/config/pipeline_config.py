"""
Pipeline Configuration
======================
Typed view of config/settings.py with JSON file loading, CLI overrides
and validation. Unknown keys are rejected.
"""

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

from config import settings
from config.validator import ConfigurationError, validate_configuration


@dataclass(frozen=True)
class Config:
    """
    Every tunable of the segmentation, tracking, odometry, mapping and
    inpainting stages. Defaults come from
    config/settings.py.
    """

    # Segmentation
    score_threshold: float = settings.SCORE_THRESHOLD
    dynamic_classes: Tuple[str, ...] = settings.DYNAMIC_CLASSES
    person_classes: Tuple[str, ...] = settings.PERSON_CLASSES
    centroid_outlier_ratio: float = settings.CENTROID_OUTLIER_RATIO

    # Tracking
    max_tracked_objects: int = settings.MAX_TRACKED_OBJECTS
    termination_frames: int = settings.TERMINATION_FRAMES
    velocity_threshold_person: float = settings.VELOCITY_THRESHOLD_PERSON
    velocity_threshold_object: float = settings.VELOCITY_THRESHOLD_OBJECT
    iou_threshold: float = settings.IOU_THRESHOLD
    iou_rule: str = settings.IOU_RULE
    association_gate: float = settings.ASSOCIATION_GATE
    q_pos: float = settings.Q_POS
    q_vel: float = settings.Q_VEL
    r_meas: float = settings.R_MEAS
    init_pos_std: float = settings.INIT_POS_STD
    init_vel_std: float = settings.INIT_VEL_STD

    # Odometry
    odometry_mode: str = settings.ODOMETRY_MODE
    target_features: int = settings.TARGET_FEATURES
    fast_threshold: int = settings.FAST_THRESHOLD
    grid_cols: int = settings.GRID_COLS
    grid_rows: int = settings.GRID_ROWS
    match_ratio: float = settings.MATCH_RATIO
    ransac_iterations: int = settings.RANSAC_ITERATIONS
    inlier_threshold: float = settings.INLIER_THRESHOLD
    keyframe_inlier_ratio: float = settings.KEYFRAME_INLIER_RATIO
    keyframe_translation: float = settings.KEYFRAME_TRANSLATION
    keyframe_rotation_deg: float = settings.KEYFRAME_ROTATION_DEG
    degraded_inliers: int = settings.DEGRADED_INLIERS

    # Mapping
    voxel_size: float = settings.VOXEL_SIZE
    map_stride: int = settings.MAP_STRIDE
    contamination_margin: float = settings.CONTAMINATION_MARGIN

    # Inpainting
    inpaint_enabled: bool = settings.INPAINT_ENABLED
    inpaint_into_map: bool = settings.INPAINT_INTO_MAP
    inpaint_radius: int = settings.INPAINT_RADIUS
    inpaint_depth_radius: int = settings.INPAINT_DEPTH_RADIUS
    dump_inpaint_pairs: bool = settings.DUMP_INPAINT_PAIRS

    # Association and wiring
    max_dt: float = settings.MAX_DT
    queue_capacity: int = settings.QUEUE_CAPACITY

    def __post_init__(self):
        # JSON gives lists; keep class sets hashable and ordered
        for name in ("dynamic_classes", "person_classes"):
            value = getattr(self, name)
            if isinstance(value, str):
                value = tuple(part.strip() for part in value.split(",") if part.strip())
            elif not isinstance(value, (list, tuple, set, frozenset)):
                raise ConfigurationError(f"{name} must be a list of class names, got {value!r}")
            object.__setattr__(self, name, tuple(value))
        validate_configuration(self).raise_on_errors()

    def velocity_threshold_for(self, class_name: str) -> float:
        """Speed threshold (m/s) that applies to a class."""
        if class_name in self.person_classes:
            return self.velocity_threshold_person
        return self.velocity_threshold_object

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Config":
        """
        Build a Config from a flat mapping.

        Args:
            data: Field values; missing fields keep their defaults

        Returns:
            Validated Config

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
        return cls(**dict(data))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Config":
        """
        Load a JSON config file.

        Args:
            path: File holding one JSON object

        Returns:
            Validated Config
        """
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f"Config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")

        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def with_overrides(self, overrides: Mapping[str, str]) -> "Config":
        """
        Apply string overrides such as those given by --set key=value.

        Args:
            overrides: Field name to textual value

        Returns:
            New validated Config
        """
        defaults = {f.name: getattr(self, f.name) for f in fields(self)}
        changes: Dict[str, Any] = {}
        for key, text in overrides.items():
            if key not in defaults:
                raise ConfigurationError(f"Unknown configuration key: {key}")
            changes[key] = _coerce(key, text, defaults[key])
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in ("dynamic_classes", "person_classes"):
            data[name] = list(data[name])
        return data

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def _coerce(key: str, text: str, current: Any) -> Any:
    """Convert an override string to the type of the current value."""
    if not isinstance(text, str):
        return text
    try:
        if isinstance(current, bool):
            lowered = text.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
        if isinstance(current, tuple):
            return tuple(part.strip() for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigurationError(f"Cannot parse {key}={text!r} as {type(current).__name__}")
    return text


def load_config(path: Union[str, Path, None] = None, overrides: Mapping[str, str] = None) -> Config:
    """
    Load defaults, then an optional file, then optional overrides.

    Args:
        path: Optional JSON config file
        overrides: Optional field overrides

    Returns:
        Validated Config
    """
    config = Config.from_file(path) if path else Config()
    if overrides:
        config = config.with_overrides(overrides)
    return config
