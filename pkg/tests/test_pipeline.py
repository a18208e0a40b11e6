import itertools
import threading
from dataclasses import replace
from pathlib import Path
from types import SimpleNamespace

import pytest

import main
from config.pipeline_config import Config
from config.validator import ConfigurationError
from data_processing.data_processor import DataProcessor
from dataset.trajectory_io import read_trajectory
from dataset.tum_reader import SequenceReader
from evaluation.ate import InsufficientOverlapError
from mapping.voxel_map import VoxelMap
from pipeline.base_stage import FramePacket, PipelineStage, StageFailure
from pipeline.commands import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_STAGE, cmd_bench, cmd_eval, cmd_synth, exit_code_for
from pipeline.manifest import RunManifest
from pipeline.runner import run
from pipeline.stage_factory import STAGE_ORDER, PipelineContext, StageFactory
from pipeline.stage_runner import PipelineStopped, PoseFeed, StageRunner
from pipeline.stages import TrackStage
from pipeline.timing import TimingRecorder
from synthetic.presets import walking_person
from synthetic.scene_spec import SceneSpecError
from synthetic.scene_writer import DETECTIONS_DIR
from tracking.kalman import NumericalError
from tracking.tracker import ObjectReport, TrackLogWriter
from utils.data_validator import FormatError


class _Tag(PipelineStage):
    """Appends its name to the packet's detections list."""

    def __init__(self, name, log=None):
        super().__init__(name)
        self.log = log
        self.finished = False

    def process(self, packet):
        if self.log is not None:
            self.log.append(packet.index)
        return replace(packet, detections=list(packet.detections or []) + [self.name])

    def finish(self):
        self.finished = True


class _Boom(PipelineStage):
    def __init__(self, name, at):
        super().__init__(name)
        self.at = at

    def process(self, packet):
        if packet.index == self.at:
            raise ValueError("broken frame")
        return packet


def _packets(count):
    return (FramePacket(index=k, timestamp=0.1 * k) for k in range(count))


def _counting_clock(step=0.001):
    counter = itertools.count(0.0, step)
    return lambda: next(counter)


class TestStageRunner:
    @pytest.mark.parametrize("sequential", [True, False])
    def test_frames_pass_every_stage_in_order(self, sequential):
        seen = []
        stages = [_Tag("a"), _Tag("b"), _Tag("c", log=seen)]
        runner = StageRunner(stages, capacity=1, sequential=sequential)
        assert runner.run(_packets(12)) == 12
        assert seen == list(range(12))
        assert all(stage.finished for stage in stages)

    @pytest.mark.parametrize("sequential", [True, False])
    def test_first_failure_stops_the_run(self, sequential):
        stages = [_Tag("a"), _Boom("b", at=3), _Tag("c")]
        with pytest.raises(StageFailure) as excinfo:
            StageRunner(stages, capacity=2, sequential=sequential).run(_packets(20))
        assert excinfo.value.stage == "b"
        assert excinfo.value.timestamp == pytest.approx(0.3)
        assert isinstance(excinfo.value.cause, ValueError)
        assert "stage 'b' failed at frame 0.300000" in str(excinfo.value)

    def test_source_errors_are_reported(self):
        def broken():
            yield FramePacket(index=0, timestamp=0.0)
            raise OSError("disk gone")

        with pytest.raises(StageFailure) as excinfo:
            StageRunner([_Tag("a")], capacity=1).run(broken())
        assert excinfo.value.stage == "source"

    def test_capacity_must_be_positive(self):
        with pytest.raises(ValueError):
            StageRunner([], capacity=0)


class TestPoseFeed:
    def test_wait_returns_once_published(self):
        feed = PoseFeed(poll_interval=0.01)
        publisher = threading.Timer(0.05, feed.publish, args=(3,))
        publisher.start()
        feed.wait_for(3)
        publisher.join()
        assert feed.published == 3

    def test_published_count_never_decreases(self):
        feed = PoseFeed()
        feed.publish(5)
        feed.publish(2)
        assert feed.published == 5

    def test_stop_releases_waiters(self):
        stop = threading.Event()
        stop.set()
        with pytest.raises(PipelineStopped):
            PoseFeed(stop, poll_interval=0.01).wait_for(1)


class TestStageTiming:
    def test_run_records_the_stage_duration(self):
        recorder = TimingRecorder(_counting_clock(0.25))
        stage = _Tag("a")
        stage.attach_timing(recorder)
        stage.run(FramePacket(index=0, timestamp=0.0))
        assert recorder.durations["a"] == [pytest.approx(0.25)]
        assert stage.processed == 1

    def test_track_timing_excludes_the_wait_for_the_pose(self):
        now = [0.0]

        def advance(seconds):
            now[0] += seconds

        def step(*args):
            advance(0.25)
            return SimpleNamespace(masks="masks")

        feed = SimpleNamespace(wait_for=lambda index: advance(5.0))
        odometry = SimpleNamespace(predict_pose=lambda timestamp: None)
        stage = TrackStage(SimpleNamespace(step=step), odometry, feed)
        recorder = TimingRecorder(lambda: now[0])
        stage.attach_timing(recorder)

        frame = SimpleNamespace(timestamp=0.0, depth=None, intrinsics=None)
        result = stage.run(FramePacket(index=0, timestamp=0.0, frame=frame))
        assert result.masks == "masks"
        assert now[0] == pytest.approx(5.25)
        assert recorder.durations["track"] == [pytest.approx(0.25)]

    def test_disabled_stage_passes_packets_through(self):
        stage = _Tag("a")
        stage.enabled = False
        packet = FramePacket(index=0, timestamp=0.0)
        assert stage.run(packet) is packet

    def test_report(self, tmp_path):
        times = iter([0.0, 0.5])
        recorder = TimingRecorder(lambda: next(times))
        recorder.start()
        for _ in range(3):
            recorder.record("load", 0.010)
        recorder.record("map", 0.020)
        recorder.stop(10)

        report = recorder.report()
        assert report.stages["stage"].tolist() == ["load", "map"]
        assert report.stages["mean_ms"].tolist() == pytest.approx([10.0, 20.0])
        assert report.fps == pytest.approx(20.0)
        assert report.coverage == pytest.approx(0.1)
        assert "fps 20.00" in report.summary_text()
        report.write(tmp_path)
        assert (tmp_path / "timing.csv").exists() and (tmp_path / "timing.txt").exists()


class TestManifest:
    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError, match="Unknown mode"):
            RunManifest("seq", "out", mode="fast")

    def test_negative_seed(self):
        with pytest.raises(ConfigurationError):
            RunManifest("seq", "out", seed=-1)

    def test_synthetic_detections_live_in_the_sequence(self):
        manifest = RunManifest("seq", "out", detections="synthetic:preset:walking-person")
        assert manifest.synthetic_scene == "preset:walking-person"
        assert manifest.detections_path == Path("seq") / DETECTIONS_DIR
        assert RunManifest("seq", "out", detections="dets").detections_path == Path("dets")
        assert RunManifest("seq", "out").detections_path is None

    def test_ground_truth_mode_forces_ground_truth_odometry(self):
        assert RunManifest("seq", "out", mode="gt-odometry").load_config().odometry_mode == "ground-truth"
        assert RunManifest("seq", "out").load_config().odometry_mode == "features"

    def test_overrides_reach_the_config(self):
        cfg = RunManifest("seq", "out", overrides={"voxel_size": "0.1"}).load_config()
        assert cfg.voxel_size == pytest.approx(0.1)

    def test_stage_seeds(self):
        manifest = RunManifest("seq", "out", seed=7)
        assert manifest.stage_seed(2) == RunManifest("a", "b", seed=7).stage_seed(2)
        assert manifest.stage_seed(2) != manifest.stage_seed(3)
        assert manifest.stage_seed(2) != RunManifest("seq", "out", seed=8).stage_seed(2)

    def test_file_round_trip(self, tmp_path):
        manifest = RunManifest("seq", "out", detections="dets", mode="baseline", seed=3,
                               overrides={"map_stride": "2"})
        assert RunManifest.from_file(manifest.to_file(tmp_path / "manifest.json")) == manifest

    def test_unknown_keys_and_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Unknown manifest keys"):
            RunManifest.from_dict({"sequence_dir": "s", "output_dir": "o", "gpu": True})
        with pytest.raises(ConfigurationError, match="not found"):
            RunManifest.from_file(tmp_path / "missing.json")


class TestStageFactory:
    def _context(self, tmp_path, cfg=None):
        return PipelineContext(cfg=cfg or Config(), reader=None, store=None, tracker=None, odometry=None,
                               feed=PoseFeed(), vmap=VoxelMap(), output_dir=tmp_path)

    def test_stages_come_in_dataflow_order(self, tmp_path):
        factory = StageFactory(self._context(tmp_path))
        try:
            assert [s.name for s in factory.get_all_stages()] == list(STAGE_ORDER)
            assert [s.name for s in factory.get_enabled_stages()] == ["load", "track", "odometry", "map", "log"]
        finally:
            factory.get_stage("log").close()

    def test_settings_toggle_stages(self, tmp_path):
        cfg = Config(inpaint_enabled=True)
        factory = StageFactory(self._context(tmp_path, cfg), {"map": False, "warp": True})
        try:
            names = [s.name for s in factory.get_enabled_stages()]
            assert "map" not in names
            assert "inpaint" in names
            assert factory.get_stage("warp") is None
        finally:
            factory.get_stage("log").close()


class TestRun:
    def test_ground_truth_odometry_run(self, walking_sequence, tmp_path):
        manifest = RunManifest(str(walking_sequence), str(tmp_path / "gt"),
                               detections=str(walking_sequence / DETECTIONS_DIR), mode="gt-odometry")
        result = run(manifest)

        assert result.frames == 60
        assert result.evaluation.ate_rmse < 1e-6
        assert result.status_counts["Ok"] == 60
        assert result.contamination.fraction < 0.01
        for name in ("trajectory", "map", "masks", "tracks", "objects", "timing", "eval", "plot", "contamination",
                     "health", "health_summary"):
            assert result.artifacts[name].exists(), name
        summary = result.artifacts["health_summary"].read_text()
        assert "Ok" in summary and "100.0%" in summary
        assert len((tmp_path / "gt" / "masks.txt").read_text().splitlines()) == 61
        assert len(read_trajectory(result.artifacts["trajectory"])) == 60
        assert RunManifest.from_file(result.artifacts["manifest"]) == manifest

    def test_baseline_runs_without_detections(self, static_sequence, tmp_path):
        manifest = RunManifest(str(static_sequence), str(tmp_path / "base"), mode="baseline", sequential=True)
        result = run(manifest)
        lines = (tmp_path / "base" / "masks.txt").read_text().splitlines()[1:]
        assert len(lines) == 60
        assert all(line.split()[1:3] == ["0", "0"] for line in lines)
        assert result.evaluation.ate_rmse < 0.05
        assert result.contamination.fraction == 0.0

    def test_masked_mode_needs_detections(self, static_sequence, tmp_path):
        with pytest.raises(ConfigurationError, match="detections"):
            run(RunManifest(str(static_sequence), str(tmp_path / "out")))


class TestCommands:
    def test_exit_codes(self):
        assert exit_code_for(ConfigurationError("bad")) == EXIT_CONFIG
        assert exit_code_for(SceneSpecError("bad scene")) == EXIT_CONFIG
        assert exit_code_for(StageFailure("load", 1.0, FormatError("bad line"))) == EXIT_DATA
        assert exit_code_for(InsufficientOverlapError("no pairs")) == EXIT_DATA
        assert exit_code_for(StageFailure("track", 1.0, NumericalError("nan"))) == EXIT_STAGE

    def test_eval_of_ground_truth_against_itself(self, walking_sequence, tmp_path):
        gt = walking_sequence / "groundtruth.txt"
        report = cmd_eval(gt, gt, plot=tmp_path / "ate.svg", csv=tmp_path / "ate.csv")
        assert report.ate_rmse == pytest.approx(0.0, abs=1e-9)
        assert (tmp_path / "ate.svg").exists() and (tmp_path / "ate.csv").exists()

    def test_synth_from_a_scene_file(self, intrinsics, tmp_path):
        scene_path = walking_person(duration=0.2, intrinsics=intrinsics).to_file(tmp_path / "scene.json")
        truth = cmd_synth(str(scene_path), tmp_path / "seq", seed=3, depth_noise_mm=2.0)
        assert len(truth.trajectory) == 6
        assert len(SequenceReader(tmp_path / "seq")) == 6

    def test_bench_uses_the_injected_clock(self, walking_sequence, tmp_path):
        manifest = RunManifest(str(walking_sequence), str(tmp_path / "bench"),
                               detections=str(walking_sequence / DETECTIONS_DIR), mode="gt-odometry")
        timing = cmd_bench(manifest, clock=_counting_clock(0.001))
        assert timing.stages["stage"].tolist() == ["load", "track", "odometry", "map", "log"]
        assert timing.stages["frames"].tolist() == [60] * 5
        assert timing.stages["mean_ms"].tolist() == pytest.approx([1.0] * 5)
        # One tick at start, two per stage call, one at stop
        assert timing.total_seconds == pytest.approx(0.601)
        assert timing.fps == pytest.approx(60 / 0.601)


class TestMain:
    def test_eval_exits_cleanly(self, walking_sequence):
        gt = str(walking_sequence / "groundtruth.txt")
        assert main.main(["eval", "--est", gt, "--gt", gt]) == EXIT_OK

    def test_missing_trajectory_is_a_data_error(self, walking_sequence, tmp_path):
        gt = str(walking_sequence / "groundtruth.txt")
        assert main.main(["eval", "--est", str(tmp_path / "none.txt"), "--gt", gt]) == EXIT_DATA

    def test_configuration_problems(self, static_sequence, tmp_path):
        base = ["run", "--sequence", str(static_sequence), "--output", str(tmp_path / "out")]
        assert main.main(base) == EXIT_CONFIG
        assert main.main(base + ["--mode", "baseline", "--set", "voxel_size"]) == EXIT_CONFIG
        assert main.main(["synth", "--spec", "preset:disco", "--out", str(tmp_path / "seq")]) == EXIT_CONFIG

    def test_override_parsing(self):
        assert main.parse_overrides(["voxel_size=0.1", "iou_rule = displacement"]) == {
            "voxel_size": "0.1", "iou_rule": "displacement"}


class TestObjectSummary:
    def _reports(self):
        return [
            ObjectReport(0.0, 1, "person", (0.0, 0.0, 2.0), 0.2, "TempStatic", True),
            ObjectReport(0.1, 1, "person", (0.1, 0.0, 2.0), 0.9, "Moving", True),
            ObjectReport(0.2, 1, "person", (0.2, 0.0, 2.0), 1.0, "Moving", False),
            ObjectReport(0.2, 2, "chair", (1.0, 0.0, 3.0), 0.0, "TempStatic", True),
        ]

    def test_one_row_per_track(self):
        summary = DataProcessor(self._reports()).object_summary()
        assert summary["id"].tolist() == [1, 2]
        person = summary.iloc[0]
        assert (person["frames"], person["frames_seen"]) == (3, 2)
        assert person["moving_fraction"] == pytest.approx(2 / 3)
        assert person["max_speed"] == pytest.approx(1.0)
        assert DataProcessor(self._reports()).moving_timestamps(1).tolist() == pytest.approx([0.1, 0.2])

    def test_rebuilt_from_the_tracks_log(self, tmp_path):
        with TrackLogWriter(tmp_path / "tracks.txt") as writer:
            writer.write(self._reports())
        rebuilt = DataProcessor.from_log(tmp_path / "tracks.txt").object_summary()
        direct = DataProcessor(self._reports()).object_summary()
        assert rebuilt["frames_seen"].tolist() == direct["frames_seen"].tolist()
        assert rebuilt["moving_fraction"].tolist() == pytest.approx(direct["moving_fraction"].tolist())

    def test_empty_summary(self):
        assert DataProcessor([]).object_summary().empty
