"""
Box Renderer
============
Per-pixel ray casting of axis-aligned textured boxes with a z-buffer.
The room shell is seen from inside (exit intersection), every other box
from outside (entry intersection). Depth is the camera-frame z of the hit.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from geometry.camera import Intrinsics
from geometry.pose import Pose
from synthetic.scene_spec import Box, SceneSpec

# Flat shading factor per face axis (x, y, z)
AXIS_SHADE = np.array([0.78, 1.0, 0.9])

HIT_EPSILON = 1e-6

KIND_ROOM = 0
KIND_STATIC = 1
KIND_DYNAMIC = 2


@dataclass(frozen=True, eq=False)
class RenderedView:
    """Images and per-pixel labels of one rendered view."""

    rgb: np.ndarray
    depth_m: np.ndarray
    surface_id: np.ndarray
    object_masks: Dict[int, np.ndarray]

    def depth_raw(self, intrinsics: Intrinsics, noise_m: float = 0.0,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """16-bit depth image, optionally with additive Gaussian noise (meters)."""
        depth = self.depth_m
        valid = depth > 0
        if noise_m > 0 and rng is not None:
            depth = depth + rng.normal(0.0, noise_m, size=depth.shape)
        raw = np.rint(depth * intrinsics.depth_scale)
        valid &= (raw >= 1) & (raw <= np.iinfo(np.uint16).max)
        return np.where(valid, raw, 0).astype(np.uint16)


@dataclass(frozen=True, eq=False)
class PlacedBox:
    box: Box
    kind: int
    object_id: int = -1


def camera_rays(intrinsics: Intrinsics) -> np.ndarray:
    """(H*W, 3) camera-frame ray directions with unit z, row-major."""
    v, u = np.mgrid[0:intrinsics.height, 0:intrinsics.width].astype(np.float64)
    x = (u - intrinsics.cx) / intrinsics.fx
    y = (v - intrinsics.cy) / intrinsics.fy
    return np.stack([x.ravel(), y.ravel(), np.ones(x.size)], axis=1)


def texture_hash(i: np.ndarray, j: np.ndarray, face: np.ndarray) -> np.ndarray:
    """Deterministic value noise in [0, 1) per integer cell and face code."""
    h = (i.astype(np.int64).astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15))
    h ^= j.astype(np.int64).astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
    h ^= face.astype(np.int64).astype(np.uint64) * np.uint64(0x165667B19E3779F9)
    h ^= h >> np.uint64(33)
    h *= np.uint64(0xFF51AFD7ED558CCD)
    h ^= h >> np.uint64(33)
    h *= np.uint64(0xC4CEB9FE1A85EC53)
    h ^= h >> np.uint64(33)
    return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def intersect_box(origin: np.ndarray, inv_dir: np.ndarray, direction: np.ndarray,
                  lo: np.ndarray, hi: np.ndarray, inside: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Slab intersection of many rays with one box.

    Args:
        origin: Ray origin (3,)
        inv_dir: Reciprocal ray directions (N, 3)
        direction: Ray directions (N, 3)
        lo, hi: Box corners
        inside: Use the exit intersection (room shell seen from inside)

    Returns:
        (hit mask, ray parameter, face axis, face side) per ray
    """
    t0 = (lo - origin) * inv_dir
    t1 = (hi - origin) * inv_dir
    tmin = np.minimum(t0, t1)
    tmax = np.maximum(t0, t1)
    t_near = tmin.max(axis=1)
    t_far = tmax.min(axis=1)
    hit = t_near <= t_far

    if inside:
        t = t_far
        axis = tmax.argmin(axis=1)
        d_axis = np.take_along_axis(direction, axis[:, None], axis=1)[:, 0]
        side = (d_axis > 0).astype(np.int64)
    else:
        t = t_near
        axis = tmin.argmax(axis=1)
        d_axis = np.take_along_axis(direction, axis[:, None], axis=1)[:, 0]
        side = (d_axis < 0).astype(np.int64)
    hit &= t > HIT_EPSILON
    return hit, t, axis, side


class BoxRenderer:
    """
    Renders views of a SceneSpec. Ray directions are cached per camera model.
    """

    def __init__(self, scene: SceneSpec):
        self.scene = scene
        self.intrinsics = scene.intrinsics
        self.rays = camera_rays(self.intrinsics)

    def boxes_at(self, t: float) -> List[PlacedBox]:
        """Room, static boxes and dynamic objects positioned at scene time t."""
        placed = [PlacedBox(self.scene.room, KIND_ROOM)]
        placed.extend(PlacedBox(box, KIND_STATIC) for box in self.scene.static_boxes)
        placed.extend(PlacedBox(obj.box_at(t), KIND_DYNAMIC, obj.object_id) for obj in self.scene.objects)
        return placed

    def render(self, pose: Pose, t: float) -> RenderedView:
        """
        Render the scene from a camera pose at scene time t.

        Args:
            pose: Camera-to-world pose
            t: Scene time in seconds (for object positions)

        Returns:
            RenderedView with exact metric depth
        """
        height, width = self.intrinsics.height, self.intrinsics.width
        direction = self.rays @ pose.rotation_matrix.T
        safe = np.where(np.abs(direction) < 1e-12, 1e-12, direction)
        inv_dir = 1.0 / safe
        origin = pose.translation

        n = direction.shape[0]
        zbuf = np.full(n, np.inf)
        owner = np.full(n, -1, dtype=np.int64)
        face_axis = np.zeros(n, dtype=np.int64)
        face_side = np.zeros(n, dtype=np.int64)

        placed = self.boxes_at(t)
        for index, item in enumerate(placed):
            hit, t_hit, axis, side = intersect_box(
                origin, inv_dir, direction, item.box.min_corner, item.box.max_corner, item.kind == KIND_ROOM
            )
            closer = hit & (t_hit < zbuf)
            zbuf[closer] = t_hit[closer]
            owner[closer] = index
            face_axis[closer] = axis[closer]
            face_side[closer] = side[closer]

        valid = owner >= 0
        depth = np.where(valid, zbuf, 0.0)
        rgb = self._shade(placed, origin, direction, depth, owner, face_axis, face_side, valid)

        surface_id = np.where(valid, owner * 6 + face_axis * 2 + face_side, -1)
        object_masks = {}
        for index, item in enumerate(placed):
            if item.kind == KIND_DYNAMIC:
                object_masks[item.object_id] = (owner == index).reshape(height, width)

        return RenderedView(
            rgb=rgb.reshape(height, width, 3),
            depth_m=depth.reshape(height, width),
            surface_id=surface_id.reshape(height, width),
            object_masks=object_masks,
        )

    def _shade(self, placed: List[PlacedBox], origin, direction, depth, owner, face_axis, face_side, valid) -> np.ndarray:
        """Flat-shaded colour with a checker of random cell values in box-local coordinates."""
        n = direction.shape[0]
        rgb = np.zeros((n, 3))
        if not np.any(valid):
            return rgb.astype(np.uint8)

        idx = np.flatnonzero(valid)
        box_index = owner[idx]
        mins = np.stack([p.box.min_corner for p in placed])
        colors = np.array([p.box.color for p in placed], dtype=np.float64)
        scales = np.array([p.box.texture_scale for p in placed], dtype=np.float64)

        points = origin + depth[idx, None] * direction[idx]
        local = points - mins[box_index]
        axis = face_axis[idx]
        a = np.take_along_axis(local, ((axis + 1) % 3)[:, None], axis=1)[:, 0]
        b = np.take_along_axis(local, ((axis + 2) % 3)[:, None], axis=1)[:, 0]

        scale = scales[box_index]
        textured = scale > 0
        safe_scale = np.where(textured, scale, 1.0)
        face = box_index * 6 + axis * 2 + face_side[idx]
        value = texture_hash(np.floor(a / safe_scale), np.floor(b / safe_scale), face)
        value = np.where(textured, value, 1.0)

        shade = AXIS_SHADE[axis] * (0.35 + 0.65 * value)
        rgb[idx] = colors[box_index] * shade[:, None]
        return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def render_view(scene: SceneSpec, pose: Pose, t: float) -> RenderedView:
    """Render one view of scene from pose at scene time t."""
    return BoxRenderer(scene).render(pose, t)
