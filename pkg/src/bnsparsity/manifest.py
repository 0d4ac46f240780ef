"""Run manifests: every artifact file is written next to a manifest holding
the command, full parameters, and master seed needed to reproduce it."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


@dataclass(frozen=True)
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    divisor: str
    gap_tolerance: float | None
    version: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "divisor": self.divisor,
            "gap_tolerance": self.gap_tolerance,
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def make_manifest(
    command: str,
    parameters: dict,
    seed: int | None,
    divisor: str = "nminusp",
    gap_tolerance: float | None = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        parameters=parameters,
        seed=seed,
        divisor=divisor,
        gap_tolerance=gap_tolerance,
        version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def write_manifest(path, manifest: RunManifest) -> None:
    Path(path).write_text(manifest.to_json() + "\n", encoding="utf-8")
