"""Shared fixtures: a half-resolution camera, seeded generators and rendered sequences."""

from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from config.pipeline_config import Config
from config.settings import DEFAULT_INTRINSICS
from dataset.detections import Detection, bbox_from_mask
from geometry.camera import Intrinsics
from geometry.pose import Pose
from synthetic.presets import idle_chair, static_room, walking_person
from synthetic.scene_writer import render_sequence


@pytest.fixture(scope="session")
def intrinsics() -> Intrinsics:
    """320x240 version of the default camera."""
    return Intrinsics.from_dict(DEFAULT_INTRINSICS).scaled(0.5)


@pytest.fixture
def cfg() -> Config:
    return Config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def random_pose(rng: np.random.Generator, max_angle_deg: float = 30.0, max_shift: float = 1.0) -> Pose:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = np.radians(rng.uniform(-max_angle_deg, max_angle_deg))
    rotation = Rotation.from_rotvec(axis * angle)
    return Pose(rotation.as_quat(), rng.uniform(-max_shift, max_shift, size=3))


def box_mask(shape, top: int, left: int, height: int, width: int) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[top:top + height, left:left + width] = True
    return mask


def make_detection(mask: np.ndarray, class_name: str = "person", score: float = 0.95) -> Detection:
    class_ids = {"person": 1, "bottle": 44, "chair": 62, "tv": 72}
    return Detection(class_ids.get(class_name, 0), class_name, score, bbox_from_mask(mask), mask)


@pytest.fixture(scope="session")
def walking_sequence(tmp_path_factory, intrinsics) -> Path:
    """Two seconds of the walking-person scene at 320x240."""
    out = tmp_path_factory.mktemp("walking")
    render_sequence(walking_person(duration=2.0, intrinsics=intrinsics), out)
    return out


@pytest.fixture(scope="session")
def static_sequence(tmp_path_factory, intrinsics) -> Path:
    """Two seconds of the static room at 320x240."""
    out = tmp_path_factory.mktemp("static")
    render_sequence(static_room(duration=2.0, intrinsics=intrinsics), out)
    return out


@pytest.fixture(scope="session")
def chair_sequence(tmp_path_factory, intrinsics) -> Path:
    """Idle chair that starts moving after one second."""
    out = tmp_path_factory.mktemp("chair")
    render_sequence(idle_chair(duration=1.6, idle_time=1.0, intrinsics=intrinsics), out)
    return out
