"""
Synthetic Scenes
================
Ray-cast box scenes with exact ground truth for testing the pipeline.
"""

from synthetic.perturbation import perturb_detections, perturb_frame
from synthetic.presets import PRESETS, load_preset, resolve_scene
from synthetic.renderer import BoxRenderer, RenderedView, render_view
from synthetic.scene_spec import NoiseSpec, SceneSpec, SceneSpecError
from synthetic.scene_writer import GroundTruth, read_object_records, read_volumes, render_sequence

__all__ = [
    "BoxRenderer",
    "GroundTruth",
    "NoiseSpec",
    "PRESETS",
    "RenderedView",
    "SceneSpec",
    "SceneSpecError",
    "load_preset",
    "perturb_detections",
    "perturb_frame",
    "read_object_records",
    "read_volumes",
    "render_sequence",
    "render_view",
    "resolve_scene",
]
