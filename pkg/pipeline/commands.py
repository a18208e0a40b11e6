"""
Commands
========
Thin wrappers behind the CLI sub-commands, plus the mapping from
exceptions to process exit codes.
"""

from dataclasses import replace
from pathlib import Path
from typing import Optional, Union

from config.validator import ConfigurationError
from dataset.trajectory_io import read_trajectory
from evaluation.ate import EvalReport, InsufficientOverlapError, compute_ate
from evaluation.plotting import emit_plot
from pipeline.base_stage import StageFailure
from pipeline.manifest import RunManifest
from pipeline.runner import PLOT_AXES, RunResult, run
from pipeline.timing import Clock, TimingReport
from synthetic.presets import resolve_scene
from synthetic.scene_spec import NoiseSpec
from synthetic.scene_writer import GroundTruth, render_sequence
from utils.data_validator import DataValidationError
from utils.logger import log_execution_time, setup_logger

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_STAGE = 4
COVERAGE_TOLERANCE = 0.15

logger = setup_logger("commands")


def exit_code_for(error: BaseException) -> int:
    """
    Process exit code for an error: 2 configuration, 3 data/format,
    4 any other stage failure. Too little trajectory overlap to evaluate
    counts as a data error.
    """
    if isinstance(error, StageFailure):
        error = error.cause
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(error, (DataValidationError, FileNotFoundError, InsufficientOverlapError)):
        return EXIT_DATA
    return EXIT_STAGE


@log_execution_time
def cmd_synth(spec: str, out: Union[str, Path], seed: int = 0, depth_noise_mm: float = 0.0,
              dropout: float = 0.0) -> GroundTruth:
    """
    Render a scene to a sequence directory.

    Args:
        spec: Scene JSON path or preset:<name>
        out: Output sequence directory
        seed: Noise and dropout seed
        depth_noise_mm: Depth noise standard deviation
        dropout: Per-detection drop probability

    Returns:
        GroundTruth of the written sequence
    """
    scene = resolve_scene(spec)
    noise = NoiseSpec(depth_noise_mm=depth_noise_mm, dropout=dropout, seed=seed)
    truth = render_sequence(scene, out, noise)
    logger.info(f"Wrote {scene.frame_count} frames of '{scene.name}' to {out}")
    return truth


@log_execution_time
def cmd_eval(est_path: Union[str, Path], gt_path: Union[str, Path], max_dt: float = 0.02,
             plot: Optional[Union[str, Path]] = None, csv: Optional[Union[str, Path]] = None) -> EvalReport:
    """
    ATE of an estimated trajectory file against a ground-truth file.

    Args:
        est_path: Estimated trajectory (TUM format)
        gt_path: Ground-truth trajectory (TUM format)
        max_dt: Association tolerance in seconds
        plot: Optional SVG output
        csv: Optional per-pair error CSV output

    Returns:
        EvalReport
    """
    est = read_trajectory(est_path)
    gt = read_trajectory(gt_path)
    report = compute_ate(est, gt, max_dt)
    if plot:
        emit_plot(est, gt, plot, alignment=report.alignment, axes=PLOT_AXES)
    if csv:
        report.write_csv(csv)
    return report


def cmd_run(manifest: RunManifest, clock: Optional[Clock] = None) -> RunResult:
    return run(manifest, clock)


@log_execution_time
def cmd_bench(manifest: RunManifest, clock: Optional[Clock] = None) -> TimingReport:
    """
    Run sequentially and report per-stage timing.

    Stages run one after another so their times add up to the end-to-end
    time up to loop overhead.

    Args:
        manifest: Run to measure
        clock: Injected clock for tests

    Returns:
        TimingReport
    """
    result = run(replace(manifest, sequential=True), clock)
    timing = result.timing
    if abs(1.0 - timing.coverage) > COVERAGE_TOLERANCE:
        logger.warning(f"Stage timings cover {timing.coverage:.0%} of end-to-end time")
    logger.info(f"Benchmark: {timing.fps:.1f} fps over {timing.frames} frames")
    return timing
