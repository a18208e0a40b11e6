import json
import logging

import pytest

from config import settings
from config.pipeline_config import Config, load_config
from config.validator import ConfigurationError
from utils.logger import log_execution_time, resolve_level, setup_logger


def test_defaults_match_settings():
    cfg = Config()
    assert cfg.score_threshold == settings.SCORE_THRESHOLD
    assert cfg.termination_frames == 10
    assert cfg.max_tracked_objects == 5
    assert cfg.velocity_threshold_person == pytest.approx(0.7)
    assert cfg.velocity_threshold_object == pytest.approx(1.2)
    assert cfg.iou_rule == "hysteresis"
    assert cfg.dynamic_classes == ("person", "chair", "bottle")


def test_velocity_threshold_depends_on_class():
    cfg = Config()
    assert cfg.velocity_threshold_for("person") == cfg.velocity_threshold_person
    assert cfg.velocity_threshold_for("chair") == cfg.velocity_threshold_object


def test_every_violation_is_reported():
    with pytest.raises(ConfigurationError) as excinfo:
        Config(score_threshold=1.5, termination_frames=0, iou_rule="sometimes")
    message = str(excinfo.value)
    assert "score_threshold" in message
    assert "termination_frames" in message
    assert "iou_rule" in message


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigurationError, match="Unknown configuration keys: colour"):
        Config.from_dict({"colour": "red"})


@pytest.mark.parametrize("key, value", [
    ("centroid_outlier_ratio", "abc"),
    ("contamination_margin", "0.05"),
    ("match_ratio", None),
    ("q_pos", [0.1]),
])
def test_non_numeric_json_values_are_configuration_errors(tmp_path, key, value):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({key: value}))
    with pytest.raises(ConfigurationError, match=f"{key} must be a number"):
        Config.from_file(path)


def test_class_list_must_be_a_sequence():
    with pytest.raises(ConfigurationError, match="dynamic_classes"):
        Config.from_dict({"dynamic_classes": 3})


def test_file_round_trip(tmp_path):
    cfg = Config(voxel_size=0.1, dynamic_classes=("person",), inpaint_enabled=True)
    path = cfg.to_file(tmp_path / "config.json")
    assert json.loads(path.read_text())["dynamic_classes"] == ["person"]
    assert Config.from_file(path) == cfg


def test_invalid_json_names_the_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "voxel_size": ,\n}\n')
    with pytest.raises(ConfigurationError, match="line 2"):
        Config.from_file(path)


def test_missing_file():
    with pytest.raises(ConfigurationError, match="not found"):
        Config.from_file("/nonexistent/config.json")


def test_top_level_must_be_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigurationError, match="top level"):
        Config.from_file(path)


@pytest.mark.parametrize("key, text, expected", [
    ("termination_frames", "4", 4),
    ("voxel_size", "0.02", 0.02),
    ("inpaint_enabled", "yes", True),
    ("inpaint_into_map", "off", False),
    ("dynamic_classes", "person, bottle", ("person", "bottle")),
    ("iou_rule", "displacement", "displacement"),
])
def test_overrides_are_coerced(key, text, expected):
    cfg = Config().with_overrides({key: text})
    assert getattr(cfg, key) == expected


def test_bad_override_value():
    with pytest.raises(ConfigurationError, match="Cannot parse"):
        Config().with_overrides({"termination_frames": "ten"})


def test_load_config_applies_file_then_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"voxel_size": 0.1, "map_stride": 2}))
    cfg = load_config(path, {"map_stride": "8"})
    assert cfg.voxel_size == pytest.approx(0.1)
    assert cfg.map_stride == 8


@pytest.mark.parametrize("debug, name, expected", [
    (True, "ERROR", logging.DEBUG),
    (False, "warning", logging.WARNING),
    (False, "chatty", logging.INFO),
])
def test_log_level_resolution(debug, name, expected):
    assert resolve_level(debug, name) == expected


def test_logger_handler_is_attached_once():
    first = setup_logger("test-component")
    second = setup_logger("test-component")
    assert first is second
    assert len(second.handlers) == 1


def test_timed_command_reraises():
    @log_execution_time
    def broken():
        raise ValueError("nope")

    with pytest.raises(ValueError, match="nope"):
        broken()
    assert broken.__name__ == "broken"
