"""
Pipeline Runner
===============
Wires loading, tracking, odometry, inpainting and mapping into one run and
writes every artifact under the output directory:

    trajectory.txt      estimated camera trajectory (TUM format)
    map.ply             static voxel map
    masks.txt           per-frame mask sizes and digests
    tracks.txt          per-object tracker reports
    objects.csv         per-object summary
    odometry_health.txt per-frame odometry status
    odometry_summary.txt odometry status counts
    timing.txt/.csv     per-stage timing
    eval.txt, ate.csv, trajectory.svg   when groundtruth.txt exists
    contamination.txt   when the sequence carries synthetic volumes
"""

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from config.pipeline_config import Config
from config.validator import ConfigurationError
from data_processing.data_processor import DataProcessor
from dataset.detections import DetectionStore
from dataset.trajectory_io import read_trajectory, write_trajectory
from dataset.tum_reader import SequenceReader
from evaluation.ate import EvalReport, InsufficientOverlapError, compute_ate
from evaluation.plotting import emit_plot
from mapping.voxel_map import ContaminationReport, VoxelMap, contamination, export_ply
from odometry.frontend import BaseOdometry, GroundTruthOdometry, VisualOdometry
from pipeline.base_stage import FramePacket
from pipeline.manifest import RunManifest
from pipeline.stage_factory import PipelineContext, StageFactory
from pipeline.stage_runner import PoseFeed, StageRunner
from pipeline.timing import Clock, TimingRecorder, TimingReport
from synthetic.scene_writer import VOLUMES_FILE, read_volumes, render_sequence
from synthetic.presets import resolve_scene
from tracking.tracker import DynamicObjectTracker
from utils.logger import log_execution_time, setup_logger

logger = setup_logger("PipelineRunner")

# Plots are top-down: world x across, world z (depth) up the page
PLOT_AXES = (0, 2)


@dataclass
class RunResult:
    manifest: RunManifest
    config: Config
    frames: int
    output_dir: Path
    artifacts: Dict[str, Path] = field(default_factory=dict)
    timing: Optional[TimingReport] = None
    evaluation: Optional[EvalReport] = None
    contamination: Optional[ContaminationReport] = None
    status_counts: Dict[str, int] = field(default_factory=dict)
    objects: Optional[DataProcessor] = None


def prepare_sequence(manifest: RunManifest) -> None:
    """Render the synthetic scene named by the manifest if the sequence is missing."""
    scene_ref = manifest.synthetic_scene
    if scene_ref is None or (manifest.sequence_path / "rgb.txt").exists():
        return
    logger.info(f"Rendering synthetic scene {scene_ref} into {manifest.sequence_path}")
    render_sequence(resolve_scene(scene_ref), manifest.sequence_path)


def build_odometry(manifest: RunManifest, cfg: Config, reader: SequenceReader) -> BaseOdometry:
    if cfg.odometry_mode == "ground-truth":
        if not reader.has_groundtruth():
            raise ConfigurationError(f"ground-truth odometry needs {reader.groundtruth_path}")
        return GroundTruthOdometry(read_trajectory(reader.groundtruth_path), cfg.max_dt)
    return VisualOdometry(cfg, seed=manifest.stage_seed(2))


def open_detections(manifest: RunManifest, cfg: Config) -> Optional[DetectionStore]:
    path = manifest.detections_path
    if path is None or not path.is_dir():
        if manifest.mode != "baseline":
            raise ConfigurationError(f"{manifest.mode} mode needs a detections directory, got {path}")
        logger.warning("No detections for the baseline run, tracker output will be empty")
        return None
    return DetectionStore(path, cfg.max_dt)


@log_execution_time
def run(manifest: RunManifest, clock: Optional[Clock] = None) -> RunResult:
    """
    Run the full pipeline for one manifest.

    Args:
        manifest: Inputs, mode, config and seed
        clock: Timing clock (perf_counter by default)

    Returns:
        RunResult with artifact paths and reports

    Raises:
        ConfigurationError: Invalid config or missing required inputs
        StageFailure: A stage failed on a frame
    """
    cfg = manifest.load_config()
    out = manifest.output_path
    out.mkdir(parents=True, exist_ok=True)
    prepare_sequence(manifest)

    reader = SequenceReader(manifest.sequence_path, max_dt=cfg.max_dt)
    store = open_detections(manifest, cfg)
    odometry = build_odometry(manifest, cfg, reader)

    stop_event = threading.Event()
    feed = PoseFeed(stop_event)
    vmap = VoxelMap(cfg.voxel_size)
    context = PipelineContext(
        cfg=cfg,
        reader=reader,
        store=store,
        tracker=DynamicObjectTracker(cfg),
        odometry=odometry,
        feed=feed,
        vmap=vmap,
        output_dir=out,
        apply_masks=manifest.mode != "baseline",
        inpaint_dump_dir=out / "inpaint" if cfg.dump_inpaint_pairs else None,
    )
    factory = StageFactory(context)
    recorder = TimingRecorder(clock)
    factory.attach_timing(recorder)
    runner = StageRunner(factory.get_enabled_stages(), cfg.queue_capacity, manifest.sequential, stop_event)

    logger.info(f"Running {manifest.mode} on {len(reader)} frames from {manifest.sequence_path}")
    timestamps = reader.timestamps
    packets = (FramePacket(index=k, timestamp=timestamps[k]) for k in range(len(reader)))
    log_stage = factory.get_stage("log")
    recorder.start()
    try:
        frames = runner.run(packets)
    finally:
        log_stage.close()
    recorder.stop(frames)

    result = RunResult(manifest=manifest, config=cfg, frames=frames, output_dir=out)
    artifacts = result.artifacts
    artifacts["manifest"] = manifest.to_file(out / "manifest.json")
    artifacts["config"] = cfg.to_file(out / "config.json")
    artifacts["masks"] = out / "masks.txt"
    artifacts["tracks"] = out / "tracks.txt"
    artifacts["trajectory"] = write_trajectory(odometry.trajectory, out / "trajectory.txt",
                                               header=f"estimated trajectory, mode {manifest.mode}")
    artifacts["health"] = odometry.health.write_log(out / "odometry_health.txt")
    artifacts["health_summary"] = odometry.health.write_summary(out / "odometry_summary.txt")
    result.status_counts = odometry.health.get_status_counts()

    if vmap.cell_count:
        artifacts["map"] = export_ply(vmap, out / "map.ply")
    else:
        logger.warning("Map is empty, no PLY written")

    result.objects = DataProcessor(log_stage.reports)
    artifacts["objects"] = result.objects.export_to_csv(out / "objects.csv")

    result.timing = recorder.report()
    artifacts["timing"] = result.timing.write(out)

    if reader.has_groundtruth():
        groundtruth = read_trajectory(reader.groundtruth_path)
        try:
            report = compute_ate(odometry.trajectory, groundtruth, cfg.max_dt)
        except InsufficientOverlapError as e:
            logger.warning(f"Skipping evaluation: {e}")
        else:
            result.evaluation = report
            artifacts["eval"] = report.write_summary(out / "eval.txt")
            artifacts["ate_csv"] = report.write_csv(out / "ate.csv")
            artifacts["plot"] = emit_plot(odometry.trajectory, groundtruth, out / "trajectory.svg",
                                          alignment=report.alignment, axes=PLOT_AXES,
                                          title=f"{manifest.mode}: ATE RMSE {report.ate_rmse:.4f} m")
            logger.info(f"ATE RMSE {report.ate_rmse:.4f} m over {report.pair_count} poses")

    volumes_path = manifest.sequence_path / VOLUMES_FILE
    if volumes_path.exists():
        result.contamination = contamination(vmap, read_volumes(volumes_path), cfg.contamination_margin)
        path = out / "contamination.txt"
        path.write_text(result.contamination.summary_text(), encoding="utf-8")
        artifacts["contamination"] = path
        logger.info(f"Map contamination {result.contamination.fraction:.4%}")

    logger.info(f"Processed {frames} frames at {result.timing.fps:.1f} fps, outputs in {out}")
    return result
