"""
Stage Factory
=============
Builds the stage instances of a run from shared run state and provides
easy access to them in dataflow order.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

from config.pipeline_config import Config
from dataset.detections import DetectionStore
from dataset.tum_reader import SequenceReader
from mapping.voxel_map import VoxelMap
from odometry.frontend import BaseOdometry
from pipeline.base_stage import PipelineStage
from pipeline.stage_runner import PoseFeed
from pipeline.stages import InpaintStage, LoadStage, LogStage, MapStage, OdometryStage, TrackStage
from pipeline.timing import TimingRecorder
from tracking.tracker import DynamicObjectTracker
from utils.logger import setup_logger

STAGE_ORDER = ("load", "track", "odometry", "inpaint", "map", "log")


@dataclass
class PipelineContext:
    """State shared by the stages of one run."""

    cfg: Config
    reader: SequenceReader
    store: Optional[DetectionStore]
    tracker: DynamicObjectTracker
    odometry: BaseOdometry
    feed: PoseFeed
    vmap: VoxelMap
    output_dir: Path
    apply_masks: bool = True
    inpaint_dump_dir: Optional[Path] = None


class StageFactory:
    """
    Factory class for the pipeline stages.
    Makes it easy to add new stages and toggle existing ones.
    """

    def __init__(self, context: PipelineContext, stage_settings: Optional[Dict[str, bool]] = None):
        """
        Initialize the stage factory.

        Args:
            context: Shared run state
            stage_settings: Optional stage name -> enabled overrides
        """
        self.context = context
        self.stages: Dict[str, PipelineStage] = {}
        self.logger = setup_logger("StageFactory")
        self._create_stages(stage_settings or {})

    def _create_stages(self, settings: Dict[str, bool]) -> None:
        ctx = self.context
        # Map stage names to their builders
        stage_builders: Dict[str, Callable[[], PipelineStage]] = {
            "load": lambda: LoadStage(ctx.reader, ctx.store),
            "track": lambda: TrackStage(ctx.tracker, ctx.odometry, ctx.feed, ctx.apply_masks),
            "odometry": lambda: OdometryStage(ctx.odometry, ctx.feed),
            "inpaint": lambda: InpaintStage(ctx.cfg, ctx.inpaint_dump_dir),
            "map": lambda: MapStage(ctx.vmap, ctx.cfg),
            "log": lambda: LogStage(ctx.output_dir),
        }
        unknown = sorted(set(settings) - set(stage_builders))
        for name in unknown:
            self.logger.warning(f"Unknown stage: {name}")

        for name in STAGE_ORDER:
            stage = stage_builders[name]()
            if name in settings:
                stage.enabled = bool(settings[name]) and stage.enabled
            self.stages[name] = stage

    def get_stage(self, name: str) -> Optional[PipelineStage]:
        return self.stages.get(name)

    def get_all_stages(self) -> List[PipelineStage]:
        return [self.stages[name] for name in STAGE_ORDER]

    def get_enabled_stages(self) -> List[PipelineStage]:
        return [stage for stage in self.get_all_stages() if stage.enabled]

    def attach_timing(self, recorder: TimingRecorder) -> None:
        for stage in self.get_enabled_stages():
            stage.attach_timing(recorder)
