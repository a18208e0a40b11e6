"""
Data Processor
==============
Turns the per-object tracker reports of a run into pandas tables for
analysis, console display and CSV export.
"""

from pathlib import Path
from typing import Iterable, Optional, Union

import pandas as pd
from rich.console import Console
from rich.table import Table

from tracking.tracker import ObjectReport

REPORT_COLUMNS = ["timestamp", "id", "class", "cx", "cy", "cz", "speed", "status", "matched"]
SUMMARY_COLUMNS = ["id", "class", "frames", "frames_seen", "moving_fraction", "mean_speed", "max_speed",
                   "first_seen", "last_seen"]


class DataProcessor:
    """
    Handles per-object report analysis, display, and export.
    """

    def __init__(self, reports: Iterable[ObjectReport]):
        """
        Initialize the data processor.

        Args:
            reports: Tracker reports in frame order
        """
        rows = [
            (r.timestamp, r.track_id, r.class_name, r.position[0], r.position[1], r.position[2], r.speed,
             r.status, r.matched)
            for r in reports
        ]
        self.data = pd.DataFrame(rows, columns=REPORT_COLUMNS)

    @classmethod
    def from_log(cls, path: Union[str, Path]) -> "DataProcessor":
        """Rebuild reports from a tracks log written by the pipeline."""
        processor = cls([])
        frame = pd.read_csv(path, sep=" ", comment="#", header=None, names=REPORT_COLUMNS)
        frame["matched"] = frame["matched"] == "seen"
        processor.data = frame
        return processor

    def object_summary(self) -> pd.DataFrame:
        """
        One row per track: frames alive, frames seen, share of frames
        classified Moving and speed statistics.
        """
        if self.data.empty:
            return pd.DataFrame(columns=SUMMARY_COLUMNS)
        grouped = self.data.groupby("id", sort=True)
        summary = pd.DataFrame({
            "class": grouped["class"].first(),
            "frames": grouped.size(),
            "frames_seen": grouped["matched"].sum().astype(int),
            "moving_fraction": grouped["status"].apply(lambda s: float((s == "Moving").mean())),
            "mean_speed": grouped["speed"].mean(),
            "max_speed": grouped["speed"].max(),
            "first_seen": grouped["timestamp"].min(),
            "last_seen": grouped["timestamp"].max(),
        })
        return summary.reset_index()[SUMMARY_COLUMNS]

    def moving_timestamps(self, track_id: int) -> pd.Series:
        rows = self.data[(self.data["id"] == track_id) & (self.data["status"] == "Moving")]
        return rows["timestamp"].reset_index(drop=True)

    def export_to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.object_summary().to_csv(path, index=False, float_format="%.4f")
        return path

    def display_table(self, console: Optional[Console] = None) -> None:
        """Print the object summary as a rich table."""
        console = console or Console()
        summary = self.object_summary()
        table = Table(title="Tracked objects")
        for column in SUMMARY_COLUMNS:
            table.add_column(column, justify="left" if column == "class" else "right")
        for _, row in summary.iterrows():
            table.add_row(
                str(row["id"]), str(row["class"]), str(row["frames"]), str(row["frames_seen"]),
                f"{row['moving_fraction']:.2f}", f"{row['mean_speed']:.3f}", f"{row['max_speed']:.3f}",
                f"{row['first_seen']:.3f}", f"{row['last_seen']:.3f}",
            )
        console.print(table)
