"""
End-to-end checks on rendered sequences: paired masked/baseline runs, map
contamination, idle-object handling, timing self-consistency, determinism
and the cross-checks against brute-force reference computations.
"""

import time

import numpy as np
import pytest

from dataset.detections import DetectionStore
from dataset.trajectory_io import Trajectory
from dataset.tum_reader import SequenceReader, associate_timestamps
from evaluation.ate import compute_ate
from geometry.alignment import rigid_align
from geometry.pose import Pose, compose, transform_points
from pipeline.commands import cmd_bench
from pipeline.manifest import RunManifest
from pipeline.runner import run
from synthetic.presets import idle_chair, static_room, walking_person
from synthetic.scene_writer import DETECTIONS_DIR, OBJECTS_FILE, read_object_records, render_sequence
from tracking.kalman import H, TrackState, ekf_predict, ekf_update, initial_state
from tracking.masks import mask_iou
from tracking.tracker import DynamicObjectTracker

from conftest import random_pose

pytestmark = pytest.mark.acceptance

VELOCITY_THRESHOLD_OBJECT = 1.2


def _masked_run(sequence, out, mode="masked", sequential=False):
    manifest = RunManifest(str(sequence), str(out), detections=str(sequence / DETECTIONS_DIR), mode=mode,
                           sequential=sequential)
    return run(manifest)


def _read_columns(path):
    return [line.split() for line in path.read_text().splitlines() if line and not line.startswith("#")]


@pytest.fixture(scope="module")
def paired_runs(tmp_path_factory, intrinsics):
    """Masked, baseline and object-free runs of ten seconds of the walking person."""
    root = tmp_path_factory.mktemp("paired")
    scene = walking_person(duration=10.0, intrinsics=intrinsics)
    render_sequence(scene, root / "dynamic")
    render_sequence(scene.without_objects(), root / "static")
    return {
        "masked": _masked_run(root / "dynamic", root / "out-masked"),
        "baseline": _masked_run(root / "dynamic", root / "out-baseline", mode="baseline"),
        "static": _masked_run(root / "static", root / "out-static"),
    }


def test_ate_metric_matches_the_hand_computed_value():
    started = time.perf_counter()
    angles = np.linspace(0.0, 2.0 * np.pi, 100, endpoint=False)
    gt = Trajectory((0.1 * k, Pose([0, 0, 0, 1], [np.cos(a), np.sin(a), 0.0])) for k, a in enumerate(angles))
    est = Trajectory((0.1 * k, Pose([0, 0, 0, 1], [1.05 * np.cos(a), 1.05 * np.sin(a), 0.0]))
                     for k, a in enumerate(angles))
    assert compute_ate(est, gt).ate_rmse == pytest.approx(0.05, abs=1e-9)

    rng = np.random.default_rng(11)
    transform = random_pose(rng, max_angle_deg=120.0, max_shift=5.0)
    helix = Trajectory((0.1 * k, Pose([0, 0, 0, 1], [np.cos(a), np.sin(a), 0.01 * k])) for k, a in enumerate(angles))
    moved = Trajectory((t, compose(transform, pose)) for t, pose in helix)
    assert compute_ate(moved, helix).ate_rmse == pytest.approx(0.0, abs=1e-9)
    assert time.perf_counter() - started < 1.0


class TestTrackerSuite:
    def test_velocity_converges_within_five_percent(self, cfg):
        state = initial_state([0.0, 0.0, 2.0], cfg.init_pos_std, cfg.init_vel_std)
        for k in range(1, 51):
            state = ekf_predict(state, 1 / 30, cfg.q_pos, cfg.q_vel)
            state = ekf_update(state, [k / 30, 0.0, 2.0], cfg.r_meas)
        assert np.linalg.norm(state.velocity - [1.0, 0.0, 0.0]) < 0.05

    def test_covariance_stays_symmetric_positive_definite(self, cfg):
        rng = np.random.default_rng(21)
        state = initial_state(rng.normal(size=3), cfg.init_pos_std, cfg.init_vel_std)
        for _ in range(1000):
            state = ekf_predict(state, rng.uniform(0.01, 0.1), cfg.q_pos, cfg.q_vel)
            if rng.random() < 0.7:
                state = ekf_update(state, state.position + rng.normal(0.0, 0.05, 3), cfg.r_meas)
            assert np.abs(state.P - state.P.T).max() < 1e-9
        assert np.all(np.linalg.eigvalsh(state.P) > 0)

    def test_odometry_mask_is_inside_the_mapping_mask(self, walking_sequence, cfg):
        reader = SequenceReader(walking_sequence)
        store = DetectionStore(walking_sequence / DETECTIONS_DIR)
        tracker = DynamicObjectTracker(cfg)
        for frame in reader:
            result = tracker.step(store.load(frame.timestamp), frame.depth, frame.intrinsics, Pose.identity(),
                                  frame.timestamp)
            masks = result.masks
            assert not (masks.odometry_mask & ~masks.mapping_mask).any()


class TestPairedRuns:
    def test_masking_recovers_static_accuracy(self, paired_runs):
        masked = paired_runs["masked"].evaluation.ate_rmse
        baseline = paired_runs["baseline"].evaluation.ate_rmse
        static = paired_runs["static"].evaluation.ate_rmse
        assert masked <= 0.5 * baseline
        assert masked <= 1.5 * static

    def test_masked_map_is_clean(self, paired_runs):
        assert paired_runs["masked"].contamination.fraction < 0.01
        assert paired_runs["baseline"].contamination.fraction > 0.05

    def test_same_inputs_for_both_modes(self, paired_runs):
        assert paired_runs["masked"].frames == paired_runs["baseline"].frames == 300


def test_idle_object_features_are_used_until_it_moves(tmp_path, intrinsics):
    sequence = tmp_path / "chair"
    render_sequence(idle_chair(duration=6.0, intrinsics=intrinsics), sequence)
    result = _masked_run(sequence, tmp_path / "out", sequential=True)

    records = read_object_records(sequence / OBJECTS_FILE)
    onset = next(r.timestamp for r in records if r.speed > VELOCITY_THRESHOLD_OBJECT)

    health = _read_columns(result.artifacts["health"])
    assert all(status != "Lost" for ts, status, *_ in health if float(ts) < onset)

    masks = _read_columns(result.artifacts["masks"])
    timestamps = [float(row[0]) for row in masks]
    odometry_pixels = [int(row[1]) for row in masks]
    onset_index = next(k for k, t in enumerate(timestamps) if t >= onset)
    assert not any(odometry_pixels[:onset_index])
    reentry = next(k for k in range(onset_index, len(masks)) if odometry_pixels[k] > 0)
    assert reentry - onset_index <= 3


def test_stage_times_account_for_the_run(tmp_path):
    sequence = tmp_path / "full-res"
    render_sequence(static_room(duration=1.0), sequence)
    manifest = RunManifest(str(sequence), str(tmp_path / "bench"), detections=str(sequence / DETECTIONS_DIR))
    timing = cmd_bench(manifest)
    assert timing.frames == 30
    assert timing.fps > 0
    assert abs(1.0 - timing.coverage) <= 0.15


def test_same_manifest_same_bytes(walking_sequence, tmp_path):
    first = _masked_run(walking_sequence, tmp_path / "first")
    second = _masked_run(walking_sequence, tmp_path / "second")
    for name in ("trajectory", "masks", "tracks", "map"):
        assert first.artifacts[name].read_bytes() == second.artifacts[name].read_bytes(), name


class TestReferenceCrossChecks:
    def test_rigid_alignment_round_trip(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            truth = random_pose(rng, max_angle_deg=150.0, max_shift=5.0)
            src = rng.uniform(-3.0, 3.0, size=(25, 3))
            assert rigid_align(src, transform_points(truth, src)).is_close(truth, atol=1e-9)

    def test_timestamp_association_matches_exhaustive_greedy(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            a = np.sort(rng.uniform(0.0, 1.0, rng.integers(1, 21)))
            b = np.sort(rng.uniform(0.0, 1.0, rng.integers(1, 21)))
            assert associate_timestamps(a, b, 0.03) == _brute_force_pairs(a, b, 0.03)

    def test_mask_iou_matches_pixel_counting(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            a = rng.random((12, 15)) < 0.4
            b = rng.random((12, 15)) < 0.4
            both = sum(1 for v in range(12) for u in range(15) if a[v, u] and b[v, u])
            either = sum(1 for v in range(12) for u in range(15) if a[v, u] or b[v, u])
            assert mask_iou(a, b) == pytest.approx(both / either, abs=1e-12)

    def test_filter_matches_dense_matrix_arithmetic(self, cfg):
        rng = np.random.default_rng(61)
        for _ in range(20):
            root = rng.normal(size=(6, 6))
            state = TrackState(rng.normal(size=6), root @ root.T + 0.1 * np.eye(6))
            dt = 1 / 30
            F = np.block([[np.eye(3), dt * np.eye(3)], [np.zeros((3, 3)), np.eye(3)]])
            Q = np.diag([cfg.q_pos * dt] * 3 + [cfg.q_vel * dt] * 3)
            predicted = ekf_predict(state, dt, cfg.q_pos, cfg.q_vel)
            assert np.allclose(predicted.x, F @ state.x, atol=1e-9)
            assert np.allclose(predicted.P, F @ state.P @ F.T + Q, atol=1e-9)

            z = rng.normal(size=3)
            R = cfg.r_meas * np.eye(3)
            K = predicted.P @ H.T @ np.linalg.inv(H @ predicted.P @ H.T + R)
            joseph = (np.eye(6) - K @ H) @ predicted.P @ (np.eye(6) - K @ H).T + K @ R @ K.T
            updated = ekf_update(predicted, z, cfg.r_meas)
            assert np.allclose(updated.x, predicted.x + K @ (z - H @ predicted.x), atol=1e-9)
            assert np.allclose(updated.P, joseph, atol=1e-9)


def _brute_force_pairs(a, b, max_dt):
    """Repeatedly take the globally closest unused pair within max_dt."""
    used_a, used_b, pairs = set(), set(), []
    while True:
        best = None
        for i in range(len(a)):
            for j in range(len(b)):
                if i in used_a or j in used_b:
                    continue
                gap = abs(a[i] - b[j])
                if gap <= max_dt and (best is None or gap < best[0]):
                    best = (gap, i, j)
        if best is None:
            return sorted(pairs)
        used_a.add(best[1])
        used_b.add(best[2])
        pairs.append((best[1], best[2]))
