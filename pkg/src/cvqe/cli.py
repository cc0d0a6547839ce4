"""Command-line entry point: ``cvqe run``, ``cvqe scan`` and ``cvqe fci``.

Exit codes: 0 success, 1 usage / config / input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import fixtures
from .ansatz import det_to_bits, enumerate_excitations, hf_determinant
from .config import ConfigError, RunConfig, parse_config_text
from .driver import CHEMICAL_ACCURACY, RunTrajectory, diagnostics, run_cvqe, theta_step_size
from .fermion import FCIDumpError, build_qubit_hamiltonian, read_fcidump
from .oracle import LanczosNotConverged, SectorBasis, fci_ground_energy, hf_energy

log = logging.getLogger("cvqe")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
TRAJECTORY_COLUMNS = [
    "iteration", "cycle", "energy", "best_energy", "n_dets_current", "reset_flag", "dets_added",
]
AGGREGATE_COLUMNS = [
    "bond_label", "status", "E_HF", "E_UCCSD_only", "E_CVQE", "E_FCI",
    "error_HF", "error_UCCSD_only", "error_CVQE", "chemical_accuracy_CVQE",
    "p_HF_like", "p_top10",
]


class NumericFailure(RuntimeError):
    pass


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def write_trajectory(traj: RunTrajectory, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for i in range(len(traj.energies)):
            w.writerow([
                i + 1, traj.cycles[i], fmt(traj.energies[i]), fmt(traj.best_energies[i]),
                traj.n_dets[i], int(traj.reset_flags[i]), traj.dets_added[i],
            ])


def read_trajectory(path: Path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _load_problem(cfg: RunConfig):
    path = cfg.fcidump_path()
    try:
        ints = read_fcidump(path)
    except OSError as exc:
        raise ConfigError(f"cannot read FCIDUMP {path}: {exc.strerror}") from None
    H = build_qubit_hamiltonian(ints)
    return ints, H


def _reference_energies(ints, H, sz2=None):
    hf = hf_determinant(ints.n_electrons, H.n_qubits)
    e_fci = fci_ground_energy(H, SectorBasis.build(H.n_qubits, ints.n_electrons, sz2))
    return hf, hf_energy(H, hf), e_fci


def execute(cfg: RunConfig, out_dir: Path) -> dict:
    """Run one job described by ``cfg``; write artefacts into ``out_dir``; return the summary."""
    t0 = time.perf_counter()
    ints, H = _load_problem(cfg)
    try:
        hf, e_hf, e_fci = _reference_energies(ints, H, cfg.fci_sz2)
    except LanczosNotConverged as exc:
        raise NumericFailure(str(exc)) from exc
    summary = {
        "bond_label": cfg.bond_label,
        "mode": cfg.mode,
        "fcidump": str(cfg.fcidump_path()),
        "n_qubits": H.n_qubits,
        "n_electrons": ints.n_electrons,
        "n_pauli_terms": len(H),
        "hf_energy": e_hf,
        "fci_energy": e_fci,
        "seed": cfg.cycle.seed,
        "config": cfg.to_mapping(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.mode != "fci":
        excs = enumerate_excitations(ints.n_electrons, H.n_qubits)
        try:
            traj = run_cvqe(H, excs, cfg.cycle, hf)
        except FloatingPointError as exc:
            raise NumericFailure(str(exc)) from exc
        write_trajectory(traj, out_dir / "trajectory.csv")
        p_hf, p_top = diagnostics(traj.reference, hf)
        summary.update({
            "final_energy": traj.best_energy,
            "last_energy": traj.energies[-1],
            "error": traj.best_energy - e_fci,
            "chemical_accuracy": bool(traj.best_energy - e_fci < CHEMICAL_ACCURACY),
            "p_HF_like": p_hf,
            "p_top10": p_top,
            "cycles_completed": traj.cycles_completed,
            "converged": traj.converged,
            "n_iterations": len(traj.energies),
            "n_dets_final": len(traj.reference),
            "n_dets_max": max(traj.n_dets),
            "n_params": len(excs),
            "reference": {
                "dets": [det_to_bits(d, H.n_qubits) for d in traj.reference.dets],
                "coeffs": traj.reference.coeffs.tolist(),
            },
            "theta": traj.theta.tolist(),
            "cycles": [
                {
                    "cycle": ev.cycle, "energy": ev.energy, "best_energy": ev.best_energy,
                    "grad_theta_norm": ev.grad_theta_norm, "grad_c_norm": ev.grad_c_norm,
                    "p_th": ev.p_th, "added": len(ev.added), "pruned": len(ev.pruned),
                    "reset": ev.reset_fired, "n_dets": ev.n_dets,
                    "p_HF_like": ev.p_hf_like, "p_top10": ev.p_top10,
                }
                for ev in traj.events
            ],
        })
    summary["wall_time_s"] = time.perf_counter() - t0
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "mode", None):
        changes["mode"] = args.mode
    if getattr(args, "n_dets", None) is not None:
        changes["n_dets"] = args.n_dets
    if getattr(args, "shots", None) is not None:
        changes["n_shots"] = args.shots
    if getattr(args, "exact_selection", False):
        changes["selection_mode"] = "exact"
    if getattr(args, "output_dir", None):
        changes["output_dir"] = str(Path(args.output_dir).resolve())
    return cfg.replace_cycle(**changes) if changes else cfg


def cmd_run(args) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    summary = execute(cfg, cfg.output_path())
    _report(summary)
    return EXIT_OK


def _report(summary: dict) -> None:
    label = summary["bond_label"] or Path(summary["fcidump"]).stem
    if "final_energy" in summary:
        print(
            f"{label}: {summary['mode']} E={summary['final_energy']:.10f} "
            f"E_FCI={summary['fci_energy']:.10f} error={summary['error']:.3e} "
            f"n_dets={summary['n_dets_final']} p_HF_like={summary['p_HF_like']:.3f} "
            f"p_top10={summary['p_top10']:.3f}"
        )
    else:
        print(f"{label}: E_HF={summary['hf_energy']:.10f} E_FCI={summary['fci_energy']:.10f}")


def _point_config(base: RunConfig, fixture: str, index: int, explicit_step: bool) -> RunConfig:
    raw = base.to_mapping()
    if Path(fixture).exists():
        raw["fcidump"] = str(Path(fixture).resolve())
        label = Path(fixture).stem
        bond = None
    elif fixture in fixtures.provenance():
        raw["fcidump"] = f"fixture:{fixture}"
        label = fixture
        bond = fixtures.provenance()[fixture]["bond_length_angstrom"]
    else:
        raise ConfigError(f"fixture {fixture!r} is neither a file nor a bundled fixture")
    raw["bond_label"] = label
    raw["seed"] = base.cycle.seed + index
    if bond is not None and raw.get("system"):
        raw["bond_length"] = bond
        if not explicit_step:
            raw["theta_step_size"] = theta_step_size(raw["system"], bond)
    raw["output_dir"] = str(base.output_path() / label)
    return RunConfig.from_mapping(raw, base.base_dir)


def cmd_scan(args) -> int:
    if not args.fixtures:
        print("error: scan needs at least one fixture", file=sys.stderr)
        return EXIT_USAGE
    base = _apply_overrides(RunConfig.load(args.config), args)
    explicit_step = "theta_step_size" in parse_config_text(Path(args.config).read_text())
    rows, failed = [], False
    for i, fx in enumerate(args.fixtures):
        row = {c: "" for c in AGGREGATE_COLUMNS}
        try:
            point = _point_config(base, fx, i, explicit_step)
            row["bond_label"] = point.bond_label
            cvqe = execute(point.replace_cycle(mode="cvqe"), point.output_path() / "cvqe")
            ucc = execute(point.replace_cycle(mode="uccsd_only"), point.output_path() / "uccsd_only")
            e_fci, e_hf = cvqe["fci_energy"], cvqe["hf_energy"]
            row.update({
                "status": "ok",
                "E_HF": fmt(e_hf), "E_UCCSD_only": fmt(ucc["final_energy"]),
                "E_CVQE": fmt(cvqe["final_energy"]), "E_FCI": fmt(e_fci),
                "error_HF": fmt(e_hf - e_fci), "error_UCCSD_only": fmt(ucc["error"]),
                "error_CVQE": fmt(cvqe["error"]),
                "chemical_accuracy_CVQE": "pass" if cvqe["chemical_accuracy"] else "fail",
                "p_HF_like": fmt(cvqe["p_HF_like"]), "p_top10": fmt(cvqe["p_top10"]),
            })
            print(f"{point.bond_label}: CVQE error {cvqe['error']:.3e}, UCCSD error {ucc['error']:.3e}")
        except (ConfigError, FCIDumpError, OSError, NumericFailure, KeyError) as exc:
            failed = True
            row["bond_label"] = row["bond_label"] or fx
            row["status"] = f"failed: {exc}"
            print(f"{fx}: failed: {exc}", file=sys.stderr)
        rows.append(row)
    out = base.output_path()
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "aggregate.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, AGGREGATE_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_fci(args) -> int:
    path = args.fcidump
    if not Path(path).exists() and path in fixtures.provenance():
        path = fixtures.fixture_path(path)
    try:
        ints = read_fcidump(path)
    except OSError as exc:
        raise ConfigError(f"cannot read FCIDUMP {path}: {exc.strerror}") from None
    H = build_qubit_hamiltonian(ints)
    try:
        _, e_hf, e_fci = _reference_energies(ints, H)
    except LanczosNotConverged as exc:
        raise NumericFailure(str(exc)) from exc
    print(f"E_FCI = {fmt(e_fci)}")
    print(f"E_HF  = {fmt(e_hf)}")
    print(f"gap   = {fmt(e_hf - e_fci)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvqe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-cycle progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir")
        p.add_argument("--mode", choices=["cvqe", "uccsd_only", "fci"])
        p.add_argument("--n-dets", type=int)
        p.add_argument("--shots", type=int)
        p.add_argument("--exact-selection", action="store_true")

    p = sub.add_parser("run", help="run one CVQE / UCCSD-only / FCI job")
    p.add_argument("config")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scan", help="run cvqe and uccsd_only over several fixtures")
    p.add_argument("config")
    p.add_argument("fixtures", nargs="*", help="FCIDUMP paths or bundled fixture names")
    overrides(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fci", help="print FCI and HF energies of an FCIDUMP")
    p.add_argument("fcidump")
    p.set_defaults(func=cmd_fci)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, FCIDumpError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, LanczosNotConverged, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
