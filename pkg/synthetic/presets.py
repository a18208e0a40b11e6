"""
Scene Presets
=============
Ready-made scenes used by the acceptance tests and the `synth` command
(`--spec preset:<name>`). Texture cell sizes are given for the default
640x480 camera and scaled with the focal length so that features keep
their pixel size at other resolutions.
"""

from typing import Callable, Dict, Optional

import numpy as np

from config.settings import DEFAULT_INTRINSICS
from geometry.camera import Intrinsics
from synthetic.scene_spec import Box, CameraKeyframe, DynamicObject, SceneSpec, SceneSpecError, VelocitySegment

ROOM_MIN = np.array([-2.5, -1.8, -1.5])
ROOM_MAX = np.array([2.5, 1.2, 3.0])
FLOOR_Y = ROOM_MAX[1]

REFERENCE_FX = DEFAULT_INTRINSICS["fx"]


def _texture_factor(intrinsics: Intrinsics) -> float:
    return REFERENCE_FX / intrinsics.fx


def _room(texture_scale: float) -> Box:
    return Box((ROOM_MIN + ROOM_MAX) / 2.0, ROOM_MAX - ROOM_MIN, (170, 165, 150), texture_scale, "room")


def _furniture(texture_scale: float):
    cabinet = Box(np.array([-1.5, FLOOR_Y - 0.8, 2.7]), np.array([0.6, 1.6, 0.4]), (120, 140, 170), texture_scale, "cabinet")
    desk = Box(np.array([1.4, FLOOR_Y - 0.375, 2.5]), np.array([0.9, 0.75, 0.6]), (150, 120, 90), texture_scale, "desk")
    return (cabinet, desk)


def _drifting_camera():
    """Slow, non-collinear hand-held style drift in front of the back wall."""
    return (
        CameraKeyframe(0.0, np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.2, 3.0])),
        CameraKeyframe(5.0, np.array([0.25, -0.05, 0.05]), np.array([0.1, 0.2, 3.0])),
        CameraKeyframe(10.0, np.array([-0.1, 0.03, 0.1]), np.array([-0.05, 0.2, 3.0])),
    )


def _camera_for(duration: float):
    # Stretch the 10 s drift over the requested duration
    keyframes = _drifting_camera()
    scale = duration / 10.0
    return tuple(CameraKeyframe(k.t * scale, k.position, k.look_at) for k in keyframes)


def _default(intrinsics: Optional[Intrinsics]) -> Intrinsics:
    return intrinsics if intrinsics is not None else Intrinsics.from_dict(DEFAULT_INTRINSICS)


def static_room(duration: float = 10.0, fps: float = 30.0, intrinsics: Optional[Intrinsics] = None,
                texture_scale: float = 0.08) -> SceneSpec:
    """Finely textured room and furniture, drifting camera, nothing moves."""
    intrinsics = _default(intrinsics)
    scale = texture_scale * _texture_factor(intrinsics)
    return SceneSpec(duration, fps, intrinsics, _room(scale), _furniture(scale), _camera_for(duration),
                     (), name="static-room")


def walking_person(duration: float = 10.0, fps: float = 30.0, intrinsics: Optional[Intrinsics] = None,
                   include_person: bool = True) -> SceneSpec:
    """
    A finely textured person-sized box walks at 1 m/s in front of a coarsely
    textured room: it approaches the camera from 2.6 m to 1.0 m, backs off
    to 2.0 m, then paces sideways. Close up it carries most of the corners
    in the image.
    """
    intrinsics = _default(intrinsics)
    factor = _texture_factor(intrinsics)
    objects = ()
    if include_person:
        size = np.array([0.6, 1.8, 0.3])
        # Floats 5 cm above the floor so the floor never falls inside its volume
        center = np.array([0.0, FLOOR_Y - 0.05 - size[1] / 2.0, 2.6])
        schedule = [
            VelocitySegment(1.6, (0.0, 0.0, -1.0)),
            VelocitySegment(1.0, (0.0, 0.0, 1.0)),
            VelocitySegment(0.7, (1.0, 0.0, 0.0)),
            VelocitySegment(1.4, (-1.0, 0.0, 0.0)),
            VelocitySegment(1.4, (1.0, 0.0, 0.0)),
            VelocitySegment(1.4, (-1.0, 0.0, 0.0)),
            VelocitySegment(1.4, (1.0, 0.0, 0.0)),
            VelocitySegment(1.1, (-1.0, 0.0, 0.0)),
        ]
        objects = (DynamicObject(1, "person", size, center, tuple(schedule), (190, 120, 90), 0.03 * factor),)
    name = "walking-person" if include_person else "walking-person-static"
    return SceneSpec(duration, fps, intrinsics, _room(0.15 * factor), _furniture(0.1 * factor),
                     _camera_for(duration), objects, name=name)


def idle_chair(duration: float = 6.0, fps: float = 30.0, intrinsics: Optional[Intrinsics] = None,
               idle_time: float = 5.0, speed: float = 5.0) -> SceneSpec:
    """
    Untextured room with one textured chair: the chair stands still for
    idle_time seconds, then slides sideways at speed m/s and stops.
    Static camera.
    """
    intrinsics = _default(intrinsics)
    factor = _texture_factor(intrinsics)
    size = np.array([0.5, 0.9, 0.5])
    center = np.array([-0.7, FLOOR_Y - 0.02 - size[1] / 2.0, 2.0])
    travel = 1.5
    schedule = (
        VelocitySegment(idle_time, (0.0, 0.0, 0.0)),
        VelocitySegment(travel / speed, (speed, 0.0, 0.0)),
    )
    chair = DynamicObject(1, "chair", size, center, schedule, (90, 160, 110), 0.04 * factor)
    camera = (CameraKeyframe(0.0, np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.2, 3.0])),)
    return SceneSpec(duration, fps, intrinsics, _room(0.0), (), camera, (chair,), name="idle-chair")


def orbit_room(duration: float = 1.0, fps: float = 30.0, intrinsics: Optional[Intrinsics] = None,
               radius: float = 0.3) -> SceneSpec:
    """Camera circling a point in front of the furniture of a static, finely textured room."""
    intrinsics = _default(intrinsics)
    scale = 0.08 * _texture_factor(intrinsics)
    target = np.array([0.0, 0.3, 2.2])
    keyframes = []
    steps = 8
    for k in range(steps + 1):
        angle = 2.0 * np.pi * k / steps
        position = np.array([radius * np.cos(angle), -0.1 + 0.1 * np.sin(angle), radius * np.sin(angle)])
        keyframes.append(CameraKeyframe(duration * k / steps, position, target))
    return SceneSpec(duration, fps, intrinsics, _room(scale), _furniture(scale), tuple(keyframes),
                     (), name="orbit-room")


PRESET_PREFIX = "preset:"

PRESETS: Dict[str, Callable[..., SceneSpec]] = {
    "static-room": static_room,
    "walking-person": walking_person,
    "idle-chair": idle_chair,
    "orbit-room": orbit_room,
}


def load_preset(name: str, **kwargs) -> SceneSpec:
    """Build a preset scene by name."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise SceneSpecError(f"Unknown scene preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return factory(**kwargs)


def resolve_scene(reference: str) -> SceneSpec:
    """
    Scene from "preset:<name>" or from a scene JSON file path.

    Raises:
        SceneSpecError: Unknown preset or invalid scene file
    """
    if reference.startswith(PRESET_PREFIX):
        return load_preset(reference[len(PRESET_PREFIX):])
    return SceneSpec.from_file(reference)
