from pathlib import Path

import numpy as np
import pytest

from dataset.detections import DetectionStore, read_detection_file
from dataset.trajectory_io import read_trajectory
from dataset.tum_reader import SequenceReader
from geometry.camera import backproject
from geometry.pose import transform
from synthetic.perturbation import perturb_detections, perturb_frame
from synthetic.presets import PRESETS, idle_chair, load_preset, resolve_scene, walking_person
from synthetic.renderer import BoxRenderer
from synthetic.scene_spec import Box, CameraKeyframe, DynamicObject, NoiseSpec, SceneSpec, SceneSpecError, VelocitySegment
from synthetic.scene_writer import DETECTIONS_DIR, OBJECTS_FILE, VOLUMES_FILE, read_object_records, read_volumes

from conftest import box_mask, make_detection


def _corridor(intrinsics, objects=()):
    """Camera at the origin looking down +z at a wall 3 m away."""
    room = Box(np.array([0.0, 0.0, 1.0]), np.array([4.0, 4.0, 4.0]), (150, 150, 150), 0.1, "room")
    camera = (CameraKeyframe(0.0, np.zeros(3), np.array([0.0, 0.0, 1.0])),)
    return SceneSpec(1.0, 10.0, intrinsics, room, (), camera, tuple(objects), name="corridor")


def _person(schedule=()):
    return DynamicObject(1, "person", np.array([0.5, 0.5, 0.2]), np.array([0.0, 0.0, 2.0]), tuple(schedule))


class TestRenderer:
    def test_depth_is_the_camera_z_of_the_hit(self, intrinsics):
        scene = _corridor(intrinsics)
        view = BoxRenderer(scene).render(scene.camera_path.pose_at(0.0), 0.0)
        assert view.depth_m.shape == intrinsics.shape
        assert np.allclose(view.depth_m, 3.0)

    def test_object_occludes_the_wall_and_owns_its_mask(self, intrinsics):
        scene = _corridor(intrinsics, [_person()])
        view = BoxRenderer(scene).render(scene.camera_path.pose_at(0.0), 0.0)
        mask = view.object_masks[1]
        v, u = int(round(intrinsics.cy)), int(round(intrinsics.cx))
        assert mask[v, u]
        assert view.depth_m[v, u] == pytest.approx(1.9)
        assert not mask[0, 0]
        assert view.depth_m[0, 0] == pytest.approx(3.0)

    def test_rendered_points_land_on_the_surface(self, intrinsics):
        scene = _corridor(intrinsics)
        pose = scene.camera_path.pose_at(0.0)
        view = BoxRenderer(scene).render(pose, 0.0)
        for u, v in [(10, 10), (200, 50), (300, 230)]:
            point = transform(pose, backproject((u, v), view.depth_m[v, u], intrinsics))
            assert point[2] == pytest.approx(3.0)

    def test_depth_noise_is_seeded(self, intrinsics):
        scene = _corridor(intrinsics)
        view = BoxRenderer(scene).render(scene.camera_path.pose_at(0.0), 0.0)
        clean = view.depth_raw(intrinsics)
        noisy_a = view.depth_raw(intrinsics, 0.01, np.random.default_rng(3))
        noisy_b = view.depth_raw(intrinsics, 0.01, np.random.default_rng(3))
        assert np.all(clean == 15000)
        assert np.array_equal(noisy_a, noisy_b)
        assert not np.array_equal(noisy_a, clean)


class TestSceneSpec:
    def test_objects_follow_their_schedule(self):
        obj = _person([VelocitySegment(1.0, (1.0, 0.0, 0.0)), VelocitySegment(0.5, (0.0, 0.0, -2.0))])
        assert obj.center_at(0.5) == pytest.approx([0.5, 0.0, 2.0])
        assert obj.center_at(1.25) == pytest.approx([1.0, 0.0, 1.5])
        assert obj.center_at(5.0) == pytest.approx([1.0, 0.0, 1.0])
        assert obj.velocity_at(0.5) == pytest.approx([1.0, 0.0, 0.0])
        assert obj.velocity_at(5.0) == pytest.approx([0.0, 0.0, 0.0])

    def test_objects_must_stay_in_the_room(self, intrinsics):
        runaway = _person([VelocitySegment(1.0, (5.0, 0.0, 0.0))])
        with pytest.raises(SceneSpecError, match="leaves the room"):
            _corridor(intrinsics, [runaway])

    def test_camera_looks_along_forward_with_y_down(self):
        rotation = CameraKeyframe(0.0, np.zeros(3), np.array([0.0, 0.0, 1.0])).rotation()
        assert rotation == pytest.approx(np.eye(3))

    def test_json_round_trip(self, tmp_path, intrinsics):
        scene = walking_person(duration=1.0, intrinsics=intrinsics)
        loaded = SceneSpec.from_file(scene.to_file(tmp_path / "scene.json"))
        assert loaded.to_dict() == scene.to_dict()
        assert loaded.frame_count == 30

    def test_unknown_keys_are_rejected(self):
        with pytest.raises(SceneSpecError, match="Unknown scene keys"):
            SceneSpec.from_dict({"room": {}, "camera": [], "lights": []})

    def test_room_from_corners(self, intrinsics):
        scene = SceneSpec.from_dict({
            "duration": 1.0,
            "intrinsics": intrinsics.to_dict(),
            "room": {"min": [-1, -1, -1], "max": [1, 1, 3]},
            "camera": [{"t": 0, "position": [0, 0, 0], "look_at": [0, 0, 1]}],
        })
        assert scene.room.min_corner == pytest.approx([-1, -1, -1])
        assert scene.room.max_corner == pytest.approx([1, 1, 3])

    def test_noise_spec_ranges(self):
        with pytest.raises(SceneSpecError):
            NoiseSpec(dropout=1.5)

    def test_presets(self):
        assert set(PRESETS) == {"static-room", "walking-person", "idle-chair", "orbit-room"}
        assert resolve_scene("preset:idle-chair").name == "idle-chair"
        with pytest.raises(SceneSpecError, match="Unknown scene preset"):
            load_preset("disco")

    def test_idle_chair_starts_moving_after_the_idle_time(self):
        chair = idle_chair(idle_time=2.0, speed=3.0).objects[0]
        assert chair.velocity_at(1.9) == pytest.approx([0.0, 0.0, 0.0])
        assert chair.velocity_at(2.1) == pytest.approx([3.0, 0.0, 0.0])


class TestSceneWriter:
    def test_sequence_layout(self, walking_sequence):
        reader = SequenceReader(walking_sequence)
        assert len(reader) == 60
        assert len(read_trajectory(walking_sequence / "groundtruth.txt")) == 60
        assert len(DetectionStore(walking_sequence / DETECTIONS_DIR)) == 60

    def test_detections_match_object_records(self, walking_sequence):
        store = DetectionStore(walking_sequence / DETECTIONS_DIR)
        detections = read_detection_file(store.paths[0])
        assert [d.class_name for d in detections] == ["person"]
        assert detections[0].class_id == 1
        assert detections[0].score == pytest.approx(1.0)

        records = read_object_records(walking_sequence / OBJECTS_FILE)
        assert len(records) == 60
        assert records[0].speed == pytest.approx(1.0)

    def test_volumes_cover_every_position(self, walking_sequence):
        volumes = read_volumes(walking_sequence / VOLUMES_FILE)
        assert list(volumes) == [1]
        boxes = volumes[1]
        assert boxes.shape[1] == 6
        assert np.all(boxes[:, 3:] > boxes[:, :3])

    def test_depth_matches_the_rendered_geometry(self, static_sequence):
        reader = SequenceReader(static_sequence)
        frame = reader.read_frame(0)
        assert np.count_nonzero(frame.depth) == frame.depth.size


class TestPerturbation:
    def _frame(self, intrinsics):
        shape = intrinsics.shape
        return [make_detection(box_mask(shape, 10, 10, 30, 20)), make_detection(box_mask(shape, 100, 100, 4, 4))]

    def test_identity_when_disabled(self, intrinsics):
        frame = self._frame(intrinsics)
        assert perturb_frame(frame, 0) == frame

    def test_full_dropout(self, intrinsics):
        assert perturb_frame(self._frame(intrinsics), 0, dropout=1.0) == []

    def test_erosion_can_remove_small_instances(self, intrinsics):
        out = perturb_frame(self._frame(intrinsics), 0, radius=-3)
        assert len(out) == 1
        assert out[0].pixel_count < 600

    def test_dilation_grows_masks(self, intrinsics):
        out = perturb_frame(self._frame(intrinsics), 0, radius=2)
        assert out[0].pixel_count > 600

    def test_stream_is_deterministic(self, intrinsics):
        stream = [self._frame(intrinsics) for _ in range(20)]
        first = [len(f) for f in perturb_detections(stream, dropout=0.5, seed=7)]
        second = [len(f) for f in perturb_detections(stream, dropout=0.5, seed=7)]
        assert first == second
        assert 0 < sum(first) < 40

    def test_invalid_dropout(self):
        with pytest.raises(ValueError):
            list(perturb_detections([[]], dropout=2.0))


SCENES_DIR = Path(__file__).resolve().parent.parent / "scenes"


@pytest.mark.parametrize("name", ["walking_person.json", "person_and_bottle.json"])
def test_bundled_scene_files_load(name):
    scene = SceneSpec.from_file(SCENES_DIR / name)
    assert scene.frame_count == int(round(scene.duration * 30))
    assert scene.objects


def test_bundled_walking_scene_matches_the_preset():
    from_file = SceneSpec.from_file(SCENES_DIR / "walking_person.json")
    preset = walking_person()
    for t in (0.0, 1.6, 3.3, 7.0, 10.0):
        assert from_file.objects[0].center_at(t) == pytest.approx(preset.objects[0].center_at(t))
        assert from_file.camera_path.pose_at(t).is_close(preset.camera_path.pose_at(t), atol=1e-9)
