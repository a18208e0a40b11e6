"""
Stage Timing
============
Per-stage wall-clock recording with an injectable clock, summarised as
mean/median/p95 milliseconds per frame and end-to-end frames per second.
"""

import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import pandas as pd
import psutil

Clock = Callable[[], float]


class TimingRecorder:
    """
    Collects durations per stage; each stage appends from its own worker.
    """

    def __init__(self, clock: Optional[Clock] = None):
        self.clock: Clock = clock or time.perf_counter
        self.durations: Dict[str, List[float]] = defaultdict(list)
        self.stage_order: List[str] = []
        self._lock = threading.Lock()
        self.started: Optional[float] = None
        self.finished: Optional[float] = None
        self.frames = 0

    def register(self, stage: str) -> None:
        with self._lock:
            if stage not in self.stage_order:
                self.stage_order.append(stage)

    def record(self, stage: str, seconds: float) -> None:
        self.register(stage)
        self.durations[stage].append(float(seconds))

    def start(self) -> None:
        self.started = self.clock()

    def stop(self, frames: int) -> None:
        self.finished = self.clock()
        self.frames = int(frames)

    def report(self) -> "TimingReport":
        total = 0.0
        if self.started is not None and self.finished is not None:
            total = self.finished - self.started
        rows = []
        for stage in self.stage_order:
            series = pd.Series(self.durations.get(stage, []), dtype=float) * 1000.0
            rows.append({
                "stage": stage,
                "frames": int(series.size),
                "mean_ms": float(series.mean()) if series.size else 0.0,
                "median_ms": float(series.median()) if series.size else 0.0,
                "p95_ms": float(series.quantile(0.95)) if series.size else 0.0,
                "total_ms": float(series.sum()),
            })
        table = pd.DataFrame(rows, columns=["stage", "frames", "mean_ms", "median_ms", "p95_ms", "total_ms"])
        return TimingReport(table, self.frames, total, psutil.Process().memory_info().rss)


@dataclass
class TimingReport:
    stages: pd.DataFrame
    frames: int
    total_seconds: float
    rss_bytes: int = 0
    extra: Dict[str, float] = field(default_factory=dict)

    @property
    def fps(self) -> float:
        return self.frames / self.total_seconds if self.total_seconds > 0 else 0.0

    @property
    def stage_sum_seconds(self) -> float:
        return float(self.stages["total_ms"].sum()) / 1000.0 if not self.stages.empty else 0.0

    @property
    def coverage(self) -> float:
        """Share of end-to-end time accounted for by stage timings."""
        return self.stage_sum_seconds / self.total_seconds if self.total_seconds > 0 else 0.0

    def summary_text(self) -> str:
        lines = [f"{'stage':<12} {'mean_ms':>9} {'median_ms':>10} {'p95_ms':>9}"]
        for row in self.stages.itertuples(index=False):
            lines.append(f"{row.stage:<12} {row.mean_ms:>9.2f} {row.median_ms:>10.2f} {row.p95_ms:>9.2f}")
        lines.append(f"frames {self.frames}")
        lines.append(f"end_to_end_s {self.total_seconds:.3f}")
        lines.append(f"fps {self.fps:.2f}")
        lines.append(f"stage_coverage {self.coverage:.3f}")
        lines.append(f"rss_mb {self.rss_bytes / 2 ** 20:.1f}")
        return "\n".join(lines) + "\n"

    def write(self, directory: Union[str, Path]) -> Path:
        """Write timing.txt and timing.csv; returns the text path."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.stages.to_csv(directory / "timing.csv", index=False, float_format="%.3f")
        path = directory / "timing.txt"
        path.write_text(self.summary_text(), encoding="utf-8")
        return path
