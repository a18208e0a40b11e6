"""
Detection Filter
================
Keeps confident detections of potentially dynamic classes.
"""

from typing import List, Sequence

from config.pipeline_config import Config
from dataset.detections import Detection


def filter_detections(detections: Sequence[Detection], cfg: Config) -> List[Detection]:
    """
    Keep detections whose class is dynamic and whose score reaches the threshold.

    Args:
        detections: Raw detector output for one frame
        cfg: Pipeline configuration (score_threshold, dynamic_classes)

    Returns:
        Surviving detections sorted by score, highest first (stable for ties)
    """
    dynamic = set(cfg.dynamic_classes)
    kept = [d for d in detections if d.class_name in dynamic and d.score >= cfg.score_threshold]
    return sorted(kept, key=lambda d: -d.score)
