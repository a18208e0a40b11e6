"""
Configuration Validator
======================
Validates pipeline configuration ranges before a run starts.
"""

from typing import List


class ConfigurationError(Exception):
    """Raised when configuration validation fails."""
    pass


IOU_RULES = ("hysteresis", "displacement")
ODOMETRY_MODES = ("features", "ground-truth")


class ConfigValidator:
    """
    Validates a Config instance and collects every violation.
    """

    def __init__(self):
        """Initialize the configuration validator."""
        self.errors: List[str] = []

    def validate_all(self, config) -> bool:
        """
        Validate every configuration group.

        Args:
            config: The Config instance to check

        Returns:
            True if all validations pass, False otherwise
        """
        self.errors.clear()

        self._validate_segmentation(config)
        self._validate_tracking(config)
        self._validate_odometry(config)
        self._validate_mapping(config)
        self._validate_pipeline(config)

        return len(self.errors) == 0

    def _check_number(self, name: str, value) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.errors.append(f"{name} must be a number, got {value!r}")
            return False
        return True

    def _check_fraction(self, name: str, value) -> None:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            self.errors.append(f"{name} must be within [0, 1], got {value!r}")

    def _check_positive(self, name: str, value, integer: bool = False) -> None:
        kinds = (int,) if integer else (int, float)
        if isinstance(value, bool) or not isinstance(value, kinds) or value <= 0:
            kind = "positive integer" if integer else "positive number"
            self.errors.append(f"{name} must be a {kind}, got {value!r}")

    def _validate_segmentation(self, config) -> None:
        """Score threshold and class sets."""
        self._check_fraction("score_threshold", config.score_threshold)
        if not config.dynamic_classes:
            self.errors.append("dynamic_classes must not be empty")
        for name in config.dynamic_classes:
            if not isinstance(name, str) or not name or " " in name:
                self.errors.append(f"dynamic class names must be non-empty words, got {name!r}")
        if self._check_number("centroid_outlier_ratio", config.centroid_outlier_ratio) \
                and config.centroid_outlier_ratio <= 0:
            self.errors.append("centroid_outlier_ratio must be positive")

    def _validate_tracking(self, config) -> None:
        """Track lifecycle, motion thresholds and EKF noise."""
        self._check_positive("max_tracked_objects", config.max_tracked_objects, integer=True)
        self._check_positive("termination_frames", config.termination_frames, integer=True)
        self._check_positive("velocity_threshold_person", config.velocity_threshold_person)
        self._check_positive("velocity_threshold_object", config.velocity_threshold_object)
        self._check_fraction("iou_threshold", config.iou_threshold)
        self._check_positive("association_gate", config.association_gate)
        if config.iou_rule not in IOU_RULES:
            self.errors.append(f"iou_rule must be one of {IOU_RULES}, got {config.iou_rule!r}")
        for name in ("q_pos", "q_vel"):
            value = getattr(config, name)
            if self._check_number(name, value) and value < 0:
                self.errors.append(f"{name} must be non-negative")
        for name in ("r_meas", "init_pos_std", "init_vel_std"):
            self._check_positive(name, getattr(config, name))

    def _validate_odometry(self, config) -> None:
        """Front-end parameters."""
        if config.odometry_mode not in ODOMETRY_MODES:
            self.errors.append(f"odometry_mode must be one of {ODOMETRY_MODES}, got {config.odometry_mode!r}")
        for name in ("target_features", "fast_threshold", "grid_cols", "grid_rows", "ransac_iterations"):
            self._check_positive(name, getattr(config, name), integer=True)
        if self._check_number("match_ratio", config.match_ratio) and not 0.0 < config.match_ratio <= 1.0:
            self.errors.append("match_ratio must be within (0, 1]")
        self._check_positive("inlier_threshold", config.inlier_threshold)
        self._check_fraction("keyframe_inlier_ratio", config.keyframe_inlier_ratio)
        self._check_positive("keyframe_translation", config.keyframe_translation)
        self._check_positive("keyframe_rotation_deg", config.keyframe_rotation_deg)
        if not isinstance(config.degraded_inliers, int) or config.degraded_inliers < 0:
            self.errors.append("degraded_inliers must be a non-negative integer")

    def _validate_mapping(self, config) -> None:
        """Voxel map and inpainting."""
        self._check_positive("voxel_size", config.voxel_size)
        self._check_positive("map_stride", config.map_stride, integer=True)
        if self._check_number("contamination_margin", config.contamination_margin) \
                and config.contamination_margin < 0:
            self.errors.append("contamination_margin must be non-negative")
        self._check_positive("inpaint_radius", config.inpaint_radius, integer=True)
        self._check_positive("inpaint_depth_radius", config.inpaint_depth_radius, integer=True)

    def _validate_pipeline(self, config) -> None:
        """Association and stage wiring."""
        self._check_positive("max_dt", config.max_dt)
        self._check_positive("queue_capacity", config.queue_capacity, integer=True)

    def raise_on_errors(self) -> None:
        """Raise ConfigurationError if there are validation errors."""
        if self.errors:
            error_msg = "Configuration validation failed:\n" + "\n".join(f"  • {error}" for error in self.errors)
            raise ConfigurationError(error_msg)


def validate_configuration(config) -> ConfigValidator:
    """
    Validate configuration and return validator instance.

    Args:
        config: The Config instance to check

    Returns:
        ConfigValidator instance with validation results
    """
    validator = ConfigValidator()
    validator.validate_all(config)
    return validator
