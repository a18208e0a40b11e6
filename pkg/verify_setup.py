#!/usr/bin/env python3
"""
Setup Verification Script
=========================
Checks that every package in requirements.txt imports, that OpenCV has the
feature functions the odometry uses, and that a short synthetic sequence
renders, reads back and yields features.
Run: python verify_setup.py
"""

import importlib
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

ROOT_DIR = Path(__file__).parent
sys.path.append(str(ROOT_DIR))

# distribution name -> import name
REQUIRED_PACKAGES = {
    "numpy": "numpy",
    "scipy": "scipy",
    "pandas": "pandas",
    "opencv-python": "cv2",
    "matplotlib": "matplotlib",
    "python-dotenv": "dotenv",
    "rich": "rich",
    "psutil": "psutil",
    "pytest": "pytest",
}

OPENCV_FUNCTIONS = ("FastFeatureDetector_create", "ORB_create", "BFMatcher", "cornerSubPix", "distanceTransform")

PASS, WARN, FAIL = "PASS", "WARN", "FAIL"


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""
    hint: str = ""


def check_env_file() -> Check:
    if (ROOT_DIR / ".env").exists():
        return Check(".env file", PASS)
    return Check(".env file", WARN, "not found, built-in defaults apply", "python setup.py")


def check_packages() -> Check:
    missing = []
    for distribution, module in REQUIRED_PACKAGES.items():
        try:
            importlib.import_module(module)
        except ImportError:
            missing.append(distribution)
    if missing:
        return Check("Python packages", FAIL, f"missing {', '.join(missing)}", "pip install -r requirements.txt")
    return Check("Python packages", PASS, f"{len(REQUIRED_PACKAGES)} importable")


def check_opencv() -> Check:
    import cv2

    absent = [name for name in OPENCV_FUNCTIONS if not hasattr(cv2, name)]
    if absent:
        return Check("OpenCV features", FAIL, f"cv2 {cv2.__version__} lacks {', '.join(absent)}",
                     "pip install --force-reinstall opencv-python")
    return Check("OpenCV features", PASS, f"cv2 {cv2.__version__}")


def check_round_trip() -> Check:
    from config.settings import DEFAULT_INTRINSICS
    from dataset.tum_reader import SequenceReader
    from geometry.camera import Intrinsics
    from odometry.features import detect_features
    from synthetic.presets import walking_person
    from synthetic.scene_writer import render_sequence

    scene = walking_person(duration=0.2, intrinsics=Intrinsics.from_dict(DEFAULT_INTRINSICS).scaled(0.5))
    try:
        with tempfile.TemporaryDirectory() as tmp:
            render_sequence(scene, tmp, max_workers=1)
            reader = SequenceReader(tmp)
            frame = reader.read_frame(0)
            features = detect_features(frame.gray, frame.depth_m, None, reader.intrinsics)
            frames = len(reader)
    except Exception as e:
        return Check("Synthetic round trip", FAIL, f"{type(e).__name__}: {e}", "SLAM_DEBUG=1 python verify_setup.py")
    if not features:
        return Check("Synthetic round trip", WARN, f"{frames} frames rendered, no features detected")
    return Check("Synthetic round trip", PASS, f"{frames} frames, {len(features)} features in the first")


def run_checks():
    checks = [check_env_file(), check_packages()]
    # The remaining checks import the stack
    if checks[-1].status == PASS:
        checks += [check_opencv(), check_round_trip()]
    return checks


def report(checks) -> None:
    try:
        from rich.console import Console
        from rich.table import Table
    except ImportError:
        for check in checks:
            print(f"[{check.status}] {check.name} {check.detail}".rstrip())
            if check.hint and check.status != PASS:
                print(f"       Suggestion: {check.hint}")
        return

    styles = {PASS: "green", WARN: "yellow", FAIL: "red"}
    table = Table(title="Setup verification")
    for column in ("check", "status", "detail", "suggestion"):
        table.add_column(column)
    for check in checks:
        table.add_row(check.name, f"[{styles[check.status]}]{check.status}[/]", check.detail,
                      check.hint if check.status != PASS else "")
    console = Console()
    console.print(table)
    if any(check.status == FAIL for check in checks):
        console.print("Fix the failures above, then run [bold]python setup.py[/bold] again.")
    else:
        console.print("Ready. Try: [bold]python main.py synth --spec preset:walking-person --out data/walking-person[/bold]")


def main() -> int:
    checks = run_checks()
    report(checks)
    return 1 if any(check.status == FAIL for check in checks) else 0


if __name__ == "__main__":
    sys.exit(main())
