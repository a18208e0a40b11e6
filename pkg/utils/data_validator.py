"""
Data Validator
=============
Data-quality validation for RGB-D frames and the errors raised for bad input files.
"""

from pathlib import Path
from typing import List, Optional, Union

import numpy as np


class DataValidationError(Exception):
    """Raised when input data is unusable."""
    pass


class FormatError(DataValidationError):
    """Raised for a malformed text file; carries the file and line number when known."""

    def __init__(self, message: str, path: Union[str, Path, None] = None, line_number: Optional[int] = None):
        self.path = Path(path) if path is not None else None
        self.line_number = line_number
        location = ""
        if self.path is not None:
            location = f"{self.path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")


class FrameReadError(DataValidationError):
    """Raised when an image referenced by an index file cannot be decoded."""

    def __init__(self, path: Union[str, Path], reason: str = "unreadable image"):
        self.path = Path(path)
        super().__init__(f"{self.path}: {reason}")


class OrderViolationError(FormatError):
    """Raised when timestamps in a file do not strictly increase."""
    pass


class FrameValidator:
    """
    Validates one RGB-D frame against its camera model.
    """

    def __init__(self):
        """Initialize the frame validator."""
        self.errors: List[str] = []

    def validate_frame(self, timestamp: float, rgb: np.ndarray, depth: np.ndarray, intrinsics) -> bool:
        """
        Validate image shapes, dtypes and timestamp.

        Args:
            timestamp: Frame time in seconds
            rgb: H x W x 3 uint8 image
            depth: H x W uint16 image
            intrinsics: Camera model the images must match

        Returns:
            True if validation passes, False if critical errors found
        """
        self.errors.clear()

        if not np.isfinite(timestamp) or timestamp < 0:
            self.errors.append(f"timestamp must be finite and non-negative, got {timestamp!r}")

        expected = (intrinsics.height, intrinsics.width)
        if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[:2] != expected:
            self.errors.append(f"rgb shape {rgb.shape} does not match {expected + (3,)}")
        if rgb.dtype != np.uint8:
            self.errors.append(f"rgb must be uint8, got {rgb.dtype}")
        if depth.shape != expected:
            self.errors.append(f"depth shape {depth.shape} does not match {expected}")
        if depth.dtype != np.uint16:
            self.errors.append(f"depth must be uint16, got {depth.dtype}")

        return len(self.errors) == 0

    def raise_on_errors(self) -> None:
        """Raise DataValidationError if there are critical errors."""
        if self.errors:
            error_msg = "Frame validation failed:\n"
            error_msg += "\n".join(f"  • {error}" for error in self.errors)
            raise DataValidationError(error_msg)


def validate_frame_data(timestamp: float, rgb: np.ndarray, depth: np.ndarray, intrinsics) -> FrameValidator:
    """
    Validate one frame and return the validator instance.

    Args:
        timestamp: Frame time in seconds
        rgb: Colour image
        depth: Raw depth image
        intrinsics: Camera model

    Returns:
        FrameValidator instance with validation results
    """
    validator = FrameValidator()
    validator.validate_frame(timestamp, rgb, depth, intrinsics)
    return validator
