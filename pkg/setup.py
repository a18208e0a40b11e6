#!/usr/bin/env python3
"""
First-Time Setup Script
=======================
One command for a fresh clone: checks Python, writes a .env with logging
defaults, installs requirements.txt and renders a short demo sequence.
Uses the standard library only, since it runs before the requirements are
installed.
Run: python setup.py [--skip-install] [--skip-demo]
"""

import argparse
import subprocess
import sys
from pathlib import Path
from typing import Callable, List, NamedTuple

ROOT_DIR = Path(__file__).parent
MIN_PYTHON = (3, 9)
DEMO_PRESET = "walking-person"
DEMO_DIR = ROOT_DIR / "data" / DEMO_PRESET

ENV_TEMPLATE = """# Dynamic SLAM front end - local settings
SLAM_LOG_LEVEL=INFO
SLAM_DEBUG=false
"""

_USE_COLOR = sys.stdout.isatty() and sys.platform != "win32"
_TAGS = {
    "ok": ("[OK]", "\033[92m"),
    "fail": ("[ERROR]", "\033[91m"),
    "warn": ("[WARN]", "\033[93m"),
    "info": ("[INFO]", "\033[94m"),
}


def say(kind: str, message: str) -> None:
    tag, color = _TAGS[kind]
    line = f"{tag} {message}"
    print(f"{color}{line}\033[0m" if _USE_COLOR else line, flush=True)


class Step(NamedTuple):
    title: str
    action: Callable[[], bool]
    required: bool = False


def check_python() -> bool:
    found = sys.version_info[:3]
    if found[:2] < MIN_PYTHON:
        say("fail", f"Python {'.'.join(map(str, found))} found, {'.'.join(map(str, MIN_PYTHON))} or newer required")
        return False
    say("ok", f"Python {'.'.join(map(str, found))}")
    return True


def write_env_file() -> bool:
    env_file = ROOT_DIR / ".env"
    if env_file.exists():
        say("info", ".env already exists, leaving it untouched")
        return True
    try:
        env_file.write_text(ENV_TEMPLATE, encoding="utf-8")
    except OSError as e:
        say("fail", f"Could not write .env: {e}")
        return False
    say("ok", "Wrote .env with logging defaults")
    return True


def _run(command: List[str], failure: str) -> bool:
    """Run a child process; on failure print the tail of its stderr."""
    try:
        result = subprocess.run(command, capture_output=True, text=True, cwd=ROOT_DIR)
    except OSError as e:
        say("fail", f"{failure}: {e}")
        return False
    if result.returncode != 0:
        say("fail", f"{failure} (exit code {result.returncode})")
        if result.stderr:
            print("   " + result.stderr.strip()[-500:], flush=True)
        return False
    return True


def install_requirements() -> bool:
    requirements = ROOT_DIR / "requirements.txt"
    if not requirements.exists():
        say("fail", "requirements.txt not found")
        return False
    say("info", "Running pip install (this may take a minute)...")
    if not _run([sys.executable, "-m", "pip", "install", "-q", "-r", str(requirements)], "pip install failed"):
        return False
    say("ok", "Requirements installed")
    return True


def render_demo() -> bool:
    if (DEMO_DIR / "rgb.txt").exists():
        say("info", f"Demo sequence already present in {DEMO_DIR}")
        return True
    # Child process, so freshly installed packages are importable
    command = [sys.executable, str(ROOT_DIR / "main.py"), "synth",
               "--spec", f"preset:{DEMO_PRESET}", "--out", str(DEMO_DIR)]
    if not _run(command, "Rendering the demo sequence failed"):
        return False
    say("ok", f"Demo sequence written to {DEMO_DIR}")
    return True


def next_steps() -> str:
    sequence = f"data/{DEMO_PRESET}"
    return "\n".join([
        "Next steps:",
        "  python verify_setup.py",
        f"  python main.py run --sequence {sequence} --detections {sequence}/detections --output runs/masked",
        f"  python main.py run --sequence {sequence} --mode baseline --output runs/baseline",
        "  pytest -m \"not acceptance\"",
    ])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="First-time setup")
    parser.add_argument("--skip-install", action="store_true", help="Do not run pip")
    parser.add_argument("--skip-demo", action="store_true", help="Do not render the demo sequence")
    args = parser.parse_args(argv)

    steps = [Step("Checking Python version", check_python, required=True),
             Step("Creating .env", write_env_file)]
    if not args.skip_install:
        steps.append(Step("Installing Python dependencies", install_requirements, required=True))
    if not args.skip_demo:
        steps.append(Step(f"Rendering the {DEMO_PRESET} demo sequence", render_demo))

    print("=" * 60 + "\nDYNAMIC SLAM FRONT END - FIRST-TIME SETUP\n" + "=" * 60, flush=True)
    failed = []
    for number, step in enumerate(steps, start=1):
        print(f"\n[{number}/{len(steps)}] {step.title}", flush=True)
        if step.action():
            continue
        failed.append(step.title)
        if step.required:
            say("fail", "Cannot continue, fix the problem above and run setup again")
            return 1

    print("\n" + "=" * 60, flush=True)
    if failed:
        say("warn", f"Setup finished with problems in: {', '.join(failed)}")
    else:
        say("ok", "Setup complete")
    print(next_steps(), flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
