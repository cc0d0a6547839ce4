"""The CVQE cycle: optimise (theta, c), sample, grow and prune the reference.

Random draws come from a single generator seeded with ``CycleConfig.seed``.
Within each expansion step the order is fixed: measurement sampling first
(shots mode only), then one uniform draw per admitted determinant.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ansatz import Determinant, ExcitationList, excitation_rank
from .fermion import QubitHamiltonian
from .optimizers import AdamaxState, CyclicAdamax, RestartPolicy, gd_step
from .statevector import (
    ReferenceSet,
    energy_and_gradients,
    exact_probabilities,
    sample_counts,
    trial_state,
)

log = logging.getLogger(__name__)

CHEMICAL_ACCURACY = 1.6e-3  # Hartree

# theta step per Angstrom of bond length, quoted for half-angle excitation gates
NOMINAL_STEP_PER_ANGSTROM = {"beh2": 0.1, "h6": 0.5, "n2": 0.5}
# GD on phi = 2 theta with step s equals GD on theta with step s / 4
HALF_ANGLE_STEP_FACTOR = 0.25


def nominal_theta_step(system: str, bond_length: float, per_angstrom: Optional[float] = None) -> float:
    """Bond-length-proportional GD step, in half-angle gate units."""
    if per_angstrom is None:
        try:
            per_angstrom = NOMINAL_STEP_PER_ANGSTROM[system.lower()]
        except KeyError:
            raise KeyError(f"no step rule for {system!r}; pass per_angstrom") from None
    return per_angstrom * bond_length


def theta_step_size(system: str, bond_length: float, per_angstrom: Optional[float] = None) -> float:
    """:func:`nominal_theta_step` converted to this package's full-angle generators."""
    return HALF_ANGLE_STEP_FACTOR * nominal_theta_step(system, bond_length, per_angstrom)


@dataclass
class CycleConfig:
    iters_per_cycle: int = 200
    max_cycles: int = 20
    n_shots: int = 100_000
    selection_mode: str = "shots"  # "shots" | "exact"
    selection_enabled: bool = True
    threshold_scale: float = 3.0
    threshold_floor: Optional[float] = None  # None -> max(1/n_shots, 1e-4)
    threshold_ceiling: float = 0.5
    n_dets: int = 500
    coeff_init_scale: float = 0.1
    coeff_init_fallback: float = 1e-3
    theta_step_size: float = 0.5
    coeff_lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    restart: RestartPolicy = field(default_factory=RestartPolicy)
    seed: int = 0
    energy_tol: float = 1e-8

    def __post_init__(self):
        if isinstance(self.restart, dict):
            self.restart = RestartPolicy(**self.restart)
        if self.iters_per_cycle < 1 or self.max_cycles < 1:
            raise ValueError("iters_per_cycle and max_cycles must be >= 1")
        if self.n_dets < 1:
            raise ValueError("n_dets must be >= 1")
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")
        if self.selection_mode not in ("shots", "exact"):
            raise ValueError(f"selection_mode must be 'shots' or 'exact', not {self.selection_mode!r}")
        if not 0.0 < self.floor <= self.threshold_ceiling <= 1.0:
            raise ValueError("need 0 < threshold_floor <= threshold_ceiling <= 1")
        if self.theta_step_size <= 0:
            raise ValueError("theta_step_size must be positive")

    @property
    def floor(self) -> float:
        if self.threshold_floor is not None:
            return self.threshold_floor
        return max(1.0 / self.n_shots, 1e-4)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["threshold_floor"] = self.floor
        return out


@dataclass
class CycleEvent:
    cycle: int
    energy: float
    best_energy: float
    grad_theta_norm: float
    grad_c_norm: float
    p_th: Optional[float]
    added: List[Determinant]
    pruned: List[Determinant]
    reset_fired: bool
    n_dets: int
    p_hf_like: float
    p_top10: float


@dataclass
class RunTrajectory:
    energies: List[float] = field(default_factory=list)
    best_energies: List[float] = field(default_factory=list)
    cycles: List[int] = field(default_factory=list)
    n_dets: List[int] = field(default_factory=list)
    reset_flags: List[bool] = field(default_factory=list)
    dets_added: List[int] = field(default_factory=list)
    events: List[CycleEvent] = field(default_factory=list)
    reference: Optional[ReferenceSet] = None
    theta: Optional[np.ndarray] = None
    converged: bool = False

    @property
    def best_energy(self) -> float:
        return self.best_energies[-1]

    @property
    def cycles_completed(self) -> int:
        return len(self.events)

    def boundaries(self) -> List[int]:
        """Row indices (0-based) of the first iteration after each cycle boundary."""
        ends = [i + 1 for i, f in enumerate(self.reset_flags) if f]
        ends += [i + 1 for i, k in enumerate(self.dets_added) if k]
        return sorted(b for b in set(ends) if b < len(self.energies))


def compute_threshold(grad_theta_norm: float, cfg: CycleConfig) -> float:
    """Admission probability proportional to the ansatz-gradient norm, clamped."""
    if grad_theta_norm < 0:
        raise ValueError("gradient norm must be non-negative")
    return float(min(max(cfg.threshold_scale * grad_theta_norm, cfg.floor), cfg.threshold_ceiling))


def select_determinants(
    probs: Dict[Determinant, float], p_th: float, current: ReferenceSet
) -> List[Determinant]:
    """New determinants with probability at least ``p_th``, most probable first."""
    have = set(current.dets)
    n_el = current.n_electrons
    picked = []
    for det, p in probs.items():
        if p < p_th or det in have:
            continue
        if bin(det).count("1") != n_el:
            log.warning("ignoring determinant %s outside the %d-electron sector", bin(det), n_el)
            continue
        picked.append((det, p))
    picked.sort(key=lambda dp: (-dp[1], dp[0]))
    return [d for d, _ in picked]


def initialize_new_coefficients(
    new: Sequence[Determinant], grad_c_norm: float, cfg: CycleConfig, rng: np.random.Generator
) -> np.ndarray:
    """Random coefficients ``omega * scale * |grad_c|`` with ``omega ~ U(-1, 1)``."""
    if grad_c_norm < 0:
        raise ValueError("gradient norm must be non-negative")
    scale = grad_c_norm if grad_c_norm >= 1e-12 else cfg.coeff_init_fallback
    omega = rng.uniform(-1.0, 1.0, size=len(new))
    return omega * cfg.coeff_init_scale * scale


def prune_order(coeffs: np.ndarray, n_dets: int) -> List[int]:
    """Positions kept when retaining the ``n_dets`` largest ``|c|``, in original order."""
    if n_dets < 1:
        raise ValueError("n_dets must be >= 1")
    if len(coeffs) <= n_dets:
        return list(range(len(coeffs)))
    order = np.argsort(-np.abs(coeffs), kind="stable")  # ties: earliest admitted wins
    return sorted(order[:n_dets].tolist())


def prune_reference(ref: ReferenceSet, n_dets: int) -> ReferenceSet:
    keep = prune_order(ref.coeffs, n_dets)
    if len(keep) == len(ref):
        return ref
    return ReferenceSet([ref.dets[i] for i in keep], ref.coeffs[keep]).normalized()


def diagnostics(ref: ReferenceSet, hf: Determinant) -> Tuple[float, float]:
    """``(p_HF_like, p_top10)``: weight within double excitations of HF, and of the ten largest."""
    w = ref.coeffs**2 / float(ref.coeffs @ ref.coeffs)
    near = sum(wi for d, wi in zip(ref.dets, w) if excitation_rank(d, hf) <= 2)
    top = float(np.sum(np.sort(w)[::-1][:10]))
    return float(near), top


def run_cvqe(
    H: QubitHamiltonian,
    excs: ExcitationList,
    cfg: CycleConfig,
    hf: Determinant,
    initial: Optional[ReferenceSet] = None,
) -> RunTrajectory:
    """Run CVQE cycles from the Hartree-Fock determinant ``hf`` (or ``initial``)."""
    if excs.n_spin_orbitals != H.n_qubits:
        raise ValueError("excitations and Hamiltonian disagree on qubit count")
    rng = np.random.default_rng(cfg.seed)
    ref = (initial or ReferenceSet([hf], [1.0])).normalized()
    theta = np.zeros(len(excs))
    opt = CyclicAdamax.create(
        len(ref), cfg.restart, beta1=cfg.beta1, beta2=cfg.beta2, lr=cfg.coeff_lr, eps=cfg.eps
    )
    traj = RunTrajectory()
    best = np.inf
    prev_best = []

    for cycle in range(1, cfg.max_cycles + 1):
        fired_in_cycle = False
        for _ in range(cfg.iters_per_cycle):
            e, g_theta, g_c = energy_and_gradients(ref, theta, excs, H)
            if not np.isfinite(e):
                raise FloatingPointError(f"non-finite energy in cycle {cycle}")
            best = min(best, e)
            theta = gd_step(theta, g_theta, cfg.theta_step_size)
            coeffs, fired = opt.step(ref.coeffs, g_c)
            ref = ReferenceSet(ref.dets, coeffs).normalized()
            fired_in_cycle |= fired
            traj.energies.append(e)
            traj.best_energies.append(best)
            traj.cycles.append(cycle)
            traj.n_dets.append(len(ref))
            traj.reset_flags.append(fired)
            traj.dets_added.append(0)

        e, g_theta, g_c = energy_and_gradients(ref, theta, excs, H)
        gt_norm, gc_norm = float(np.linalg.norm(g_theta)), float(np.linalg.norm(g_c))
        p_hf, p_top = diagnostics(ref, hf)

        prev_best.append(best)
        done = cycle == cfg.max_cycles
        if (
            len(prev_best) >= 3
            and prev_best[-3] - prev_best[-2] < cfg.energy_tol
            and prev_best[-2] - prev_best[-1] < cfg.energy_tol
        ):
            traj.converged = done = True

        added, pruned, p_th = [], [], None
        if cfg.selection_enabled and not done:
            ref, opt, added, pruned, p_th = _expand(H, excs, cfg, rng, ref, theta, opt, gt_norm, gc_norm)
            traj.dets_added[-1] = len(added)
            traj.n_dets[-1] = len(ref)
            if pruned and hf in pruned:
                log.warning("cycle %d: Hartree-Fock determinant pruned from the reference", cycle)

        traj.events.append(
            CycleEvent(cycle, e, best, gt_norm, gc_norm, p_th, added, pruned,
                       fired_in_cycle, len(ref), p_hf, p_top)
        )
        log.info(
            "cycle %d: E=%.10f best=%.10f |g_theta|=%.2e n_dets=%d (+%d/-%d)",
            cycle, e, best, gt_norm, len(ref), len(added), len(pruned),
        )
        if done:
            break

    traj.reference = ref
    traj.theta = theta
    return traj


def _expand(H, excs, cfg, rng, ref, theta, opt, gt_norm, gc_norm):
    p_th = compute_threshold(gt_norm, cfg)
    state = trial_state(ref, theta, excs, H.n_qubits)
    if cfg.selection_mode == "shots":
        counts = sample_counts(state, cfg.n_shots, rng)
        probs = {d: k / cfg.n_shots for d, k in counts.items()}
    else:
        probs = exact_probabilities(state, cfg.floor)
    # at least the largest existing determinant survives the swap
    new = select_determinants(probs, p_th, ref)[: cfg.n_dets - 1]
    if not new:
        return ref, opt, [], [], p_th

    # make room for the newcomers by dropping the smallest existing |c|
    keep = list(range(len(ref)))
    if len(ref) + len(new) > cfg.n_dets:
        keep = prune_order(ref.coeffs, cfg.n_dets - len(new))
    kept = set(keep)
    pruned = [d for i, d in enumerate(ref.dets) if i not in kept]
    init = initialize_new_coefficients(new, gc_norm, cfg, rng)
    dets = [ref.dets[i] for i in keep] + list(new)
    coeffs = np.concatenate([ref.coeffs[keep], init])
    if not np.any(coeffs):
        coeffs[0] = 1.0
    opt.state = opt.state.select(keep).extended(len(new))
    return ReferenceSet(dets, coeffs).normalized(), opt, list(new), pruned, p_th
