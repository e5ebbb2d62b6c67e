"""Loading and integrity checking of scenario run directories.

A run directory is the output of one ``nanorotor --scenario <name>``
invocation: a ``manifest.json`` plus the CSV files it lists, each with a
sha256 checksum.  ``load_run`` refuses to return data whose checksum does
not match, so a stale or hand-edited CSV can never end up in a figure.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


class RenderError(Exception):
    """Raised when a run directory is missing, incomplete, or corrupt."""


@dataclass
class RunData:
    """A verified scenario run: its manifest and parsed CSV tables."""

    directory: Path
    scenario: str
    manifest: dict[str, Any]
    tables: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    def table(self, stem: str) -> dict[str, np.ndarray]:
        if stem not in self.tables:
            raise RenderError(
                f"{self.directory}: scenario {self.scenario!r} has no "
                f"{stem}.csv (found: {sorted(self.tables)})"
            )
        return self.tables[stem]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"{path}: empty CSV") from None
        rows = [row for row in reader]
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise RenderError(f"{path}: malformed CSV")
    return {name: data[:, i] for i, name in enumerate(header)}


def load_run(run_dir: str | Path) -> RunData:
    """Load and verify one run directory.

    Raises RenderError if the manifest is absent, a listed file is
    missing, or any checksum does not match.
    """
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise RenderError(f"{run_dir}: no manifest.json (not a run directory?)")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise RenderError(f"{manifest_path}: invalid JSON ({exc})") from None

    scenario = manifest.get("scenario")
    if not isinstance(scenario, str):
        raise RenderError(f"{manifest_path}: missing 'scenario' field")
    outputs = manifest.get("outputs")
    if not isinstance(outputs, dict):
        raise RenderError(f"{manifest_path}: missing 'outputs' map")

    tables: dict[str, dict[str, np.ndarray]] = {}
    for name, digest in sorted(outputs.items()):
        path = run_dir / name
        if not path.is_file():
            raise RenderError(f"{run_dir}: listed output {name!r} is missing")
        actual = _sha256(path)
        if actual != digest:
            raise RenderError(
                f"{path}: checksum mismatch (manifest {digest[:12]}..., "
                f"file {actual[:12]}...)"
            )
        if name.endswith(".csv"):
            tables[name[:-4]] = _read_csv(path)
    return RunData(directory=run_dir, scenario=scenario,
                   manifest=manifest, tables=tables)


def latest_run(scenario_dir: str | Path) -> Path:
    """Newest timestamped run directory under out/<scenario>/."""
    scenario_dir = Path(scenario_dir)
    candidates = sorted(
        d for d in scenario_dir.iterdir()
        if d.is_dir() and (d / "manifest.json").is_file()
    )
    if not candidates:
        raise RenderError(f"{scenario_dir}: no completed runs found")
    return candidates[-1]
