"""
Base Stage Class
================
This is the foundation class that all pipeline stages inherit from.
It defines the standard interface and common functionality: timing of
every call and wrapping of any failure with the stage name and frame
timestamp.
"""

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from dataset.detections import Detection
from dataset.tum_reader import Frame
from inpainting.inpainter import InpaintResult
from odometry.frontend import OdometryEstimate
from pipeline.timing import TimingRecorder
from tracking.masks import FrameMasks
from tracking.tracker import StepResult
from utils.logger import setup_logger


class PipelineStopped(Exception):
    """Raised inside a worker when another stage has failed."""


class StageFailure(RuntimeError):
    """A stage raised while processing a frame."""

    def __init__(self, stage: str, timestamp: Optional[float], cause: BaseException):
        self.stage = stage
        self.timestamp = timestamp
        self.cause = cause
        when = f"{timestamp:.6f}" if timestamp is not None else "?"
        super().__init__(f"stage '{stage}' failed at frame {when}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True, eq=False)
class FramePacket:
    """
    Message passed between stages. Each stage returns a copy with its own
    result filled in.
    """

    index: int
    timestamp: float
    frame: Optional[Frame] = None
    detections: Optional[List[Detection]] = None
    tracking: Optional[StepResult] = None
    masks: Optional[FrameMasks] = None
    estimate: Optional[OdometryEstimate] = None
    inpainted: Optional[InpaintResult] = None

    @property
    def shape(self):
        return self.frame.depth.shape


class PipelineStage(ABC):
    """
    Abstract base class for all pipeline stages.

    Subclasses implement process(); callers use run(), which times the call
    and converts exceptions into StageFailure.
    """

    def __init__(self, name: str, enabled: bool = True):
        """
        Initialize the base stage.

        Args:
            name: The name of the stage (used in timing and errors)
            enabled: Disabled stages pass packets through untouched
        """
        self.name = name
        self.enabled = enabled
        self.logger = setup_logger(f"stage.{name}")
        self.timing: Optional[TimingRecorder] = None
        self.processed = 0

    def attach_timing(self, recorder: TimingRecorder) -> None:
        self.timing = recorder
        recorder.register(self.name)

    @abstractmethod
    def process(self, packet: FramePacket) -> FramePacket:
        """
        Do this stage's work for one frame.

        Args:
            packet: Packet from the previous stage

        Returns:
            Packet carrying this stage's result
        """
        pass

    def prepare(self, packet: FramePacket) -> None:
        """Wait for whatever the frame depends on; runs before the stage timer starts."""
        pass

    def finish(self) -> None:
        """Called once after the last frame."""
        pass

    def run(self, packet: FramePacket) -> FramePacket:
        if not self.enabled:
            return packet
        clock = self.timing.clock if self.timing is not None else None
        try:
            self.prepare(packet)
            started = clock() if clock else 0.0
            result = self.process(packet)
        except (StageFailure, PipelineStopped):
            raise
        except Exception as e:
            self.logger.error(f"Frame {packet.timestamp:.6f}: {e}")
            raise StageFailure(self.name, packet.timestamp, e) from e
        if clock:
            self.timing.record(self.name, clock() - started)
        self.processed += 1
        return result


def mask_digest(mask: np.ndarray) -> str:
    """Short content hash of a boolean mask."""
    return hashlib.sha1(np.packbits(mask.astype(bool)).tobytes()).hexdigest()[:16]
