"""Bundled one-switch scenarios, one per switching case, plus their goldens."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

BUNDLED_CASE_NAMES = [
    "case_1a", "case_1b", "case_1c", "case_1d", "case_1e", "case_1f",
    "case_2a", "case_2b", "case_2c", "case_2bt", "case_2ct",
]

GOLDEN_DIR_ENV = "SLICESWITCH_GOLDEN_DIR"


def scenario_dir() -> Path:
    return Path(str(resources.files("sliceswitch") / "scenarios"))


def bundled_scenario_path(name: str) -> Path:
    path = scenario_dir() / f"{name}.yaml"
    if not path.exists():
        raise FileNotFoundError(
            f"no bundled scenario {name!r}; known: "
            + ", ".join(sorted(p.stem for p in scenario_dir().glob("*.yaml")))
        )
    return path


def golden_dir() -> Path:
    override = os.environ.get(GOLDEN_DIR_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("sliceswitch") / "golden"))


def golden_path(case_name: str) -> Path:
    return golden_dir() / f"{case_name}.trace"
