"""
Dataset Package
===============
TUM RGB-D sequence reading, per-frame detection files and trajectory text files.
"""

from dataset.detections import Detection, DetectionStore, decode_rle, encode_rle, load_detections, write_detections
from dataset.trajectory_io import Trajectory, read_trajectory, write_trajectory
from dataset.tum_reader import Frame, LoadReport, SequenceReader, associate_timestamps, load_sequence

__all__ = [
    "Detection",
    "DetectionStore",
    "Frame",
    "LoadReport",
    "SequenceReader",
    "Trajectory",
    "associate_timestamps",
    "decode_rle",
    "encode_rle",
    "load_detections",
    "load_sequence",
    "read_trajectory",
    "write_detections",
    "write_trajectory",
]
