"""Bundled desk-scale cases."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .case_io import read_case
from .case_model import PowerCase


def list_fixtures() -> list[str]:
    root = resources.files("staticgrid") / "data"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".con"))


def fixture_path(name: str) -> Path:
    path = resources.files("staticgrid") / "data" / f"{name}.con"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled case named {name!r}")
    return Path(str(path))


def load_fixture(name: str, system_base: float = 100.0) -> PowerCase:
    return read_case(fixture_path(name), system_base=system_base)
