"""
Dynamic SLAM Front End
======================
RGB-D visual odometry and mapping that tracks moving objects and keeps
them out of the pose estimate and the map.
"""

__version__ = "2.0.0"
__author__ = "Dynamic SLAM Front End"
__description__ = "Dynamic-object-aware RGB-D SLAM front end with synthetic scenes and evaluation"
