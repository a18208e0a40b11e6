"""
Segmentation Adapter
====================
Class/score filtering of ingested detections and 3D centroid computation.
"""

from segmentation.centroid import Centroid, CentroidSource, compute_centroid
from segmentation.detection_filter import filter_detections

__all__ = ["Centroid", "CentroidSource", "compute_centroid", "filter_detections"]
