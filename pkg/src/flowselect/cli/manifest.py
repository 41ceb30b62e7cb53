"""Run manifests: everything needed to reproduce a run exactly."""

from __future__ import annotations

import json
import platform
import time
from pathlib import Path

from .. import __version__


class ManifestWriter:
    def __init__(self, command: str, config_snapshot: dict, output_dir: Path):
        self.started = time.time()
        self.command = command
        self.config_snapshot = config_snapshot
        self.output_dir = output_dir
        self.artifacts: dict[str, str] = {}
        self.timings: dict[str, float] = {}

    def add_artifact(self, name: str, path: Path) -> Path:
        self.artifacts[name] = str(path)
        return path

    def add_timing(self, name: str, seconds: float) -> None:
        self.timings[name] = round(seconds, 4)

    def write(self) -> Path:
        payload = {
            "tool": "flowselect",
            "version": __version__,
            "command": self.command,
            "python": platform.python_version(),
            "seed": self.config_snapshot.get("seed"),
            "config": self.config_snapshot,
            "artifacts": self.artifacts,
            "timings_sec": self.timings,
            "wall_clock_sec": round(time.time() - self.started, 3),
        }
        path = self.output_dir / "manifest.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        missing = [p for p in self.artifacts.values() if not Path(p).exists()]
        if missing:
            raise RuntimeError(f"manifest references missing artifacts: {missing}")
        return path
