"""
Odometry Health Tracker
======================
Tracks per-frame odometry status (Ok, Degraded, Lost) over a run. Writes the
per-frame health log "timestamp status inliers features" and a status summary.
"""

from collections import Counter
from pathlib import Path
from typing import Dict, List, NamedTuple, Union


class HealthRecord(NamedTuple):
    timestamp: float
    status: str
    inliers: int
    features: int


class OdometryHealthTracker:
    """
    Tracks per-frame odometry status over a run.
    """

    STATUSES = ("Ok", "Degraded", "Lost")

    def __init__(self):
        """Initialize the health tracker."""
        self.history: List[HealthRecord] = []

    def record_result(self, timestamp: float, status: str, inliers: int, features: int) -> None:
        """
        Record the odometry outcome of one frame.

        Args:
            timestamp: Frame time in seconds
            status: One of Ok, Degraded, Lost
            inliers: RANSAC inlier count
            features: Features tracked against the keyframe
        """
        if status not in self.STATUSES:
            raise ValueError(f"Unknown odometry status: {status}")
        self.history.append(HealthRecord(float(timestamp), status, int(inliers), int(features)))

    def get_status_counts(self) -> Dict[str, int]:
        counts = Counter(record.status for record in self.history)
        return {status: counts.get(status, 0) for status in self.STATUSES}

    def get_health_report(self) -> str:
        """
        Get a formatted health report.

        Returns:
            Formatted health report string
        """
        if not self.history:
            return "No odometry health data available"

        lines = ["Odometry Health Report:"]
        lines.append("-" * 30)

        total = len(self.history)
        for status, count in self.get_status_counts().items():
            lines.append(f"{status:.<15} {count:>6d} frames {100.0 * count / total:>6.1f}%")
        lines.append(f"{'Total':.<15} {total:>6d} frames")
        return "\n".join(lines)

    def write_summary(self, path: Union[str, Path]) -> Path:
        """Write the health report as a text file and return its path."""
        path = Path(path)
        path.write_text(self.get_health_report() + "\n", encoding="utf-8")
        return path

    def write_log(self, path: Union[str, Path]) -> Path:
        """
        Write one line per frame in recording order.

        Args:
            path: Destination text file

        Returns:
            The written path
        """
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            for record in self.history:
                f.write(f"{record.timestamp:.6f} {record.status} {record.inliers} {record.features}\n")
        return path
