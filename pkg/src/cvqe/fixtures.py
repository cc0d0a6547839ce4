"""Bundled FCIDUMP fixtures (STO-3G, generated once with PySCF)."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict

from .fermion import OrbitalIntegrals, read_fcidump

_DIR = resources.files("cvqe") / "data" / "fixtures"


@lru_cache(maxsize=None)
def provenance() -> Dict[str, dict]:
    """Geometry, basis and PySCF RHF/FCI energies for every fixture."""
    return json.loads((_DIR / "provenance.json").read_text())


def names():
    return sorted(provenance())


def fixture_path(name: str) -> Path:
    try:
        return Path(str(_DIR / provenance()[name]["file"]))
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(names())}") from None


def load(name: str) -> OrbitalIntegrals:
    return read_fcidump(fixture_path(name))
