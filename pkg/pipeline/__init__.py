"""
Pipeline Package
================
Stage wiring, run orchestration, timing and CLI commands.
"""

from pipeline.base_stage import FramePacket, PipelineStage, StageFailure
from pipeline.manifest import RunManifest
from pipeline.runner import RunResult, run
from pipeline.timing import TimingRecorder, TimingReport

__all__ = ["FramePacket", "PipelineStage", "RunManifest", "RunResult", "StageFailure", "TimingRecorder",
           "TimingReport", "run"]
