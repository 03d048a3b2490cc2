"""Shared fixtures: on-disk workspaces built from the in-memory corpus."""
from __future__ import annotations

import copy
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import fixture_data as fd  # noqa: E402
from vulnhunt.config import Config  # noqa: E402


class Workspace:
    """Paths to a materialized scan workspace plus a config factory."""

    def __init__(self, root: Path):
        self.root = root
        self.export_path = root / "export.jsonl"
        self.targets_dir = root / "targets"
        self.scenario_path = root / "scenario.json"
        self.diff_path = root / "change.diff"
        self.out_dir = root / "out"
        self.store_dir = root / "store"

    def config(self, **overrides) -> Config:
        base = dict(
            mode="full",
            export_path=str(self.export_path),
            targets_dir=str(self.targets_dir),
            scenario_path=str(self.scenario_path),
            out_dir=str(self.out_dir),
            store_dir="",
            sanitizers=["address"],
            rng_seed=0,
        )
        base.update(overrides)
        return Config(**base)


@pytest.fixture
def e2e_workspace(tmp_path) -> Workspace:
    """The three-target corpus with five planted bugs, written to disk."""
    ws = Workspace(tmp_path)
    fd.write_export(fd.E2E_EXPORT_RECORDS, ws.export_path)
    fd.write_targets(fd.E2E_TARGET_OBJECTS, ws.targets_dir)
    fd.write_scenario(copy.deepcopy(fd.E2E_SCENARIO), ws.scenario_path)
    fd.write_diff(ws.diff_path)
    return ws


@pytest.fixture
def magic_workspace(tmp_path) -> Workspace:
    """Single-fuzzer corpus whose only bug hides behind one magic byte."""
    root = tmp_path / "magic"
    root.mkdir()
    ws = Workspace(root)
    fd.write_export(fd.MAGIC_EXPORT_RECORDS, ws.export_path)
    fd.write_targets([fd.MAGIC_TARGET], ws.targets_dir)
    return ws
