"""
Pipeline Stages
===============
The concrete stages, in dataflow order: load, track, odometry, inpaint,
map and log.
"""

from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from config.pipeline_config import Config
from dataset.detections import DetectionStore
from dataset.tum_reader import SequenceReader
from inpainting.inpainter import dump_pair, inpaint_frame
from mapping.voxel_map import VoxelMap, insert_frame
from odometry.frontend import BaseOdometry, OdometryStatus
from pipeline.base_stage import FramePacket, PipelineStage, mask_digest
from pipeline.stage_runner import PoseFeed
from tracking.masks import FrameMasks
from tracking.tracker import DynamicObjectTracker, ObjectReport, TrackLogWriter


class LoadStage(PipelineStage):
    """Reads the frame and its detections."""

    def __init__(self, reader: SequenceReader, store: Optional[DetectionStore]):
        super().__init__("load")
        self.reader = reader
        self.store = store

    def process(self, packet: FramePacket) -> FramePacket:
        frame = self.reader.read_frame(packet.index)
        detections = self.store.load(frame.timestamp) if self.store is not None else []
        return replace(packet, frame=frame, detections=detections)


class TrackStage(PipelineStage):
    """
    Runs the object tracker. In baseline runs the tracker still runs and is
    logged, but the masks handed on are empty.
    """

    def __init__(self, tracker: DynamicObjectTracker, odometry: BaseOdometry, feed: PoseFeed,
                 apply_masks: bool = True):
        super().__init__("track")
        self.tracker = tracker
        self.odometry = odometry
        self.feed = feed
        self.apply_masks = apply_masks

    def prepare(self, packet: FramePacket) -> None:
        self.feed.wait_for(packet.index)

    def process(self, packet: FramePacket) -> FramePacket:
        frame = packet.frame
        cam_pose = self.odometry.predict_pose(frame.timestamp)
        result = self.tracker.step(packet.detections or [], frame.depth, frame.intrinsics, cam_pose,
                                   frame.timestamp)
        masks = result.masks if self.apply_masks else FrameMasks.empty(frame.depth.shape)
        return replace(packet, tracking=result, masks=masks)


class OdometryStage(PipelineStage):
    """Locates the camera using only pixels outside the odometry mask."""

    def __init__(self, odometry: BaseOdometry, feed: PoseFeed):
        super().__init__("odometry")
        self.odometry = odometry
        self.feed = feed

    def process(self, packet: FramePacket) -> FramePacket:
        estimate = self.odometry.track_frame(packet.frame, packet.masks)
        self.feed.publish(packet.index + 1)
        return replace(packet, estimate=estimate)


class InpaintStage(PipelineStage):
    """Fills the mapping-mask region in colour and depth."""

    def __init__(self, cfg: Config, dump_dir: Optional[Path] = None):
        super().__init__("inpaint", enabled=cfg.inpaint_enabled)
        self.cfg = cfg
        self.dump_dir = dump_dir

    def process(self, packet: FramePacket) -> FramePacket:
        frame = packet.frame
        mask = packet.masks.mapping_mask
        if not mask.any():
            return packet
        result = inpaint_frame(frame.rgb, frame.depth, mask, self.cfg.inpaint_radius, self.cfg.inpaint_depth_radius)
        if self.dump_dir is not None:
            dump_pair(self.dump_dir, frame.timestamp, frame.rgb, result.rgb, mask)
        return replace(packet, inpainted=result)


class MapStage(PipelineStage):
    """Inserts unmasked pixels of tracked frames into the voxel map."""

    def __init__(self, vmap: VoxelMap, cfg: Config):
        super().__init__("map")
        self.vmap = vmap
        self.cfg = cfg
        self.skipped = 0

    def process(self, packet: FramePacket) -> FramePacket:
        estimate = packet.estimate
        if estimate.status == OdometryStatus.LOST:
            self.skipped += 1
            return packet
        frame = packet.frame
        if packet.inpainted is not None and self.cfg.inpaint_into_map:
            insert_frame(self.vmap, packet.inpainted.rgb, packet.inpainted.depth, frame.intrinsics, estimate.pose,
                         None, self.cfg.map_stride)
        else:
            insert_frame(self.vmap, frame.rgb, frame.depth, frame.intrinsics, estimate.pose,
                         packet.masks.mapping_mask, self.cfg.map_stride)
        return packet


class LogStage(PipelineStage):
    """Appends the per-frame mask and per-object tracker logs."""

    def __init__(self, output_dir: Path):
        super().__init__("log")
        self.masks_file = open(output_dir / "masks.txt", "w", encoding="utf-8")
        self.masks_file.write("# timestamp odometry_pixels mapping_pixels odometry_digest mapping_digest\n")
        self.tracks = TrackLogWriter(output_dir / "tracks.txt")
        self.reports: List[ObjectReport] = []

    def process(self, packet: FramePacket) -> FramePacket:
        masks = packet.masks
        odometry_pixels, mapping_pixels = masks.counts()
        self.masks_file.write(f"{packet.timestamp:.6f} {odometry_pixels} {mapping_pixels} "
                              f"{mask_digest(masks.odometry_mask)} {mask_digest(masks.mapping_mask)}\n")
        if packet.tracking is not None:
            self.tracks.write(packet.tracking.reports)
            self.reports.extend(packet.tracking.reports)
        return packet

    def finish(self) -> None:
        self.close()

    def close(self) -> None:
        if not self.masks_file.closed:
            self.masks_file.close()
        self.tracks.close()
