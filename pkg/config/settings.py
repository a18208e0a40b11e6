# =============================================================================
# DYNAMIC RGB-D SLAM CONFIGURATION
# =============================================================================
# This file contains the default value of every pipeline setting.
# A run can override any of them through a JSON config file or --set flags;
# see config/pipeline_config.py and docs/CONFIGURATION.md.

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# =============================================================================
# SEGMENTATION SETTINGS
# =============================================================================
# Minimum detector confidence for an instance to be used
SCORE_THRESHOLD = 0.9

# Classes treated as potentially dynamic
DYNAMIC_CLASSES = ("person", "chair", "bottle")

# Classes compared against the person velocity threshold
PERSON_CLASSES = ("person",)

# Center depth is replaced by the in-mask median when it deviates by more than this fraction
CENTROID_OUTLIER_RATIO = 0.5

# =============================================================================
# TRACKING SETTINGS
# =============================================================================
# Maximum number of live EKF tracks
MAX_TRACKED_OBJECTS = 5

# Consecutive unmatched frames before a track is removed
TERMINATION_FRAMES = 10

# Speed above which an object is Moving, in m/s
VELOCITY_THRESHOLD_PERSON = 0.7
VELOCITY_THRESHOLD_OBJECT = 1.2

# Mask IoU used for hysteresis and as association fallback
IOU_THRESHOLD = 0.5

# "hysteresis" keeps previously moving objects Moving while IoU stays high,
# "displacement" marks objects Moving when the IoU drops below the threshold
IOU_RULE = "hysteresis"

# Euclidean association gate in meters
ASSOCIATION_GATE = 0.5

# EKF noise: position/velocity process noise density and measurement variance
Q_POS = 1e-4
Q_VEL = 0.5
R_MEAS = 0.04 ** 2

# Initial standard deviations for a new track
INIT_POS_STD = 0.05
INIT_VEL_STD = 1.0

# =============================================================================
# ODOMETRY SETTINGS
# =============================================================================
# "features" runs the sparse front end, "ground-truth" reads groundtruth.txt
ODOMETRY_MODE = "features"

# Features kept per frame after grid bucketing
TARGET_FEATURES = 500
FAST_THRESHOLD = 20
GRID_COLS = 8
GRID_ROWS = 6

# Lowe ratio for descriptor matching
MATCH_RATIO = 0.8

# RANSAC over 3-point rigid hypotheses
RANSAC_ITERATIONS = 200
INLIER_THRESHOLD = 0.05

# Keyframe promotion
KEYFRAME_INLIER_RATIO = 0.6
KEYFRAME_TRANSLATION = 0.15
KEYFRAME_ROTATION_DEG = 10.0

# Fewer inliers than this marks the estimate Degraded
DEGRADED_INLIERS = 20

# =============================================================================
# MAPPING SETTINGS
# =============================================================================
VOXEL_SIZE = 0.05
MAP_STRIDE = 4

# Tolerance around ground-truth dynamic volumes when measuring contamination
CONTAMINATION_MARGIN = 0.02

# =============================================================================
# INPAINTING SETTINGS
# =============================================================================
INPAINT_ENABLED = False
INPAINT_INTO_MAP = False
INPAINT_RADIUS = 5
INPAINT_DEPTH_RADIUS = 3
DUMP_INPAINT_PAIRS = False

# =============================================================================
# EVALUATION / ASSOCIATION SETTINGS
# =============================================================================
# Maximum timestamp difference for RGB/depth, detection and trajectory association
MAX_DT = 0.02

# =============================================================================
# PIPELINE SETTINGS
# =============================================================================
# Bounded FIFO capacity between stages
QUEUE_CAPACITY = 4

# Seconds a blocked stage waits before re-checking for shutdown
QUEUE_POLL_INTERVAL = 0.1

DEFAULT_SEED = 0

# Default camera when a sequence has no camera.json (TUM fr3 factory calibration)
DEFAULT_INTRINSICS = {
    "fx": 535.4,
    "fy": 539.2,
    "cx": 320.1,
    "cy": 247.6,
    "width": 640,
    "height": 480,
    "depth_scale": 5000.0,
}

# =============================================================================
# DEBUG SETTINGS
# =============================================================================
# Enable debug mode for more detailed output
DEBUG_MODE = os.getenv("SLAM_DEBUG", "false").lower() in ("1", "true", "yes")

LOG_LEVEL = os.getenv("SLAM_LOG_LEVEL", "INFO").upper()
