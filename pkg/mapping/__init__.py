"""
Mapping Package
===============
Static voxel map, contamination scoring and PLY export.
"""

from mapping.voxel_map import (ContaminationReport, EmptyMapError, VoxelMap, contamination, export_ply,
                               insert_frame, read_ply)

__all__ = ["ContaminationReport", "EmptyMapError", "VoxelMap", "contamination", "export_ply", "insert_frame",
           "read_ply"]
