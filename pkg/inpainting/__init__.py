"""
Inpainting Package
==================
Colour and depth hole filling for regions removed by the mapping mask.
"""

from inpainting.inpainter import AllMaskedError, InpaintResult, dump_pair, inpaint_color, inpaint_depth, inpaint_frame

__all__ = ["AllMaskedError", "InpaintResult", "dump_pair", "inpaint_color", "inpaint_depth", "inpaint_frame"]
