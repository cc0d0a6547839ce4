"""Flat ``key = value`` run configuration.

One setting per line, ``#`` starts a comment.  Values are parsed as JSON
literals when possible (numbers, ``true``/``false``, ``null``, quoted
strings) and kept as bare strings otherwise.  Recognised keys:

==================  ==========================================================
fcidump             path to an FCIDUMP file (relative to the config file) or
                    ``fixture:<name>`` for a bundled fixture
mode                ``cvqe`` | ``uccsd_only`` | ``fci``
bond_label          free-form label copied into outputs
system              molecule key for the step rule (``h6``, ``beh2``, ``n2``)
bond_length         Angstrom; with ``system`` sets the default theta step
output_dir          directory for trajectory and summary files
iters_per_cycle, max_cycles, n_shots, selection_mode, threshold_scale,
threshold_floor, threshold_ceiling, n_dets, coeff_init_scale,
coeff_init_fallback, theta_step_size, coeff_lr, beta1, beta2, eps, seed,
energy_tol          as in :class:`cvqe.driver.CycleConfig`
restart_period, restart_alpha, adaptive_reset, adaptive_window,
adaptive_tol        restart policy of the coefficient optimiser
fci_sz2             optional 2*Sz filter for the FCI reference energy
==================  ==========================================================
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .driver import CycleConfig, theta_step_size
from .optimizers import RestartPolicy


class ConfigError(ValueError):
    pass


_CYCLE_KEYS = {
    f.name for f in fields(CycleConfig) if f.name not in ("restart", "selection_enabled")
}
_RESTART_KEYS = {
    "restart_period": "period",
    "restart_alpha": "alpha",
    "adaptive_reset": "adaptive_enabled",
    "adaptive_window": "window",
    "adaptive_tol": "stagnation_tol",
}
_RUN_KEYS = {"fcidump", "mode", "bond_label", "system", "bond_length", "output_dir", "fci_sz2"}
KNOWN_KEYS = _CYCLE_KEYS | set(_RESTART_KEYS) | _RUN_KEYS
MODES = ("cvqe", "uccsd_only", "fci")


def parse_config_text(text: str) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


@dataclass
class RunConfig:
    fcidump: str
    mode: str = "cvqe"
    bond_label: str = ""
    system: Optional[str] = None
    bond_length: Optional[float] = None
    output_dir: str = "cvqe_out"
    fci_sz2: Optional[int] = None
    cycle: CycleConfig = field(default_factory=CycleConfig)
    base_dir: Path = field(default=Path("."), repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")

    @classmethod
    def from_mapping(cls, raw: Dict[str, Any], base_dir: Union[str, Path] = ".") -> "RunConfig":
        unknown = set(raw) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        if "fcidump" not in raw:
            raise ConfigError("missing required key 'fcidump'")
        cyc = {k: raw[k] for k in _CYCLE_KEYS if k in raw}
        restart = {v: raw[k] for k, v in _RESTART_KEYS.items() if k in raw}
        if "theta_step_size" not in cyc and raw.get("system") and raw.get("bond_length"):
            cyc["theta_step_size"] = theta_step_size(raw["system"], float(raw["bond_length"]))
        try:
            if "restart_period" not in raw and "iters_per_cycle" in cyc:
                restart["period"] = cyc["iters_per_cycle"]
            cycle = CycleConfig(restart=RestartPolicy(**restart), **cyc)
            cycle.selection_enabled = raw.get("mode", "cvqe") != "uccsd_only"
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cls(
            fcidump=str(raw["fcidump"]),
            mode=raw.get("mode", "cvqe"),
            bond_label=str(raw.get("bond_label", "")),
            system=raw.get("system"),
            bond_length=raw.get("bond_length"),
            output_dir=str(raw.get("output_dir", "cvqe_out")),
            fci_sz2=raw.get("fci_sz2"),
            cycle=cycle,
            base_dir=Path(base_dir),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_mapping(parse_config_text(text), path.parent)

    def to_mapping(self) -> Dict[str, Any]:
        """Flat mapping with every default resolved; ``from_mapping`` inverts it."""
        out: Dict[str, Any] = {
            "fcidump": self.fcidump,
            "mode": self.mode,
            "bond_label": self.bond_label,
            "system": self.system,
            "bond_length": self.bond_length,
            "output_dir": self.output_dir,
            "fci_sz2": self.fci_sz2,
        }
        cyc = self.cycle.to_dict()
        for k in sorted(_CYCLE_KEYS):
            out[k] = cyc[k]
        for k, v in _RESTART_KEYS.items():
            out[k] = cyc["restart"][v]
        out["threshold_floor"] = self.cycle.threshold_floor  # None tracks n_shots
        return out

    def replace_cycle(self, **changes) -> "RunConfig":
        raw = self.to_mapping()
        raw.update(changes)
        return RunConfig.from_mapping(raw, self.base_dir)

    def output_path(self) -> Path:
        p = Path(self.output_dir)
        return p if p.is_absolute() else self.base_dir / p

    def fcidump_path(self) -> Union[str, Path]:
        if self.fcidump.startswith("fixture:"):
            from . import fixtures

            return fixtures.fixture_path(self.fcidump.split(":", 1)[1])
        p = Path(self.fcidump)
        return p if p.is_absolute() else self.base_dir / p
