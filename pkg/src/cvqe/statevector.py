"""Dense statevector simulation of multi-determinant references under UCCSD.

Basis index ``b`` is the occupation bitmask: bit ``j`` of ``b`` is qubit ``j``.
Every excitation generator ``kappa = T - T^dagger`` couples disjoint pairs of
basis states, ``kappa |src> = sign |dst>`` and ``kappa |dst> = -sign |src>``,
so ``exp(theta * kappa)`` is a set of independent plane rotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .ansatz import Determinant, Excitation, ExcitationList
from .fermion import QubitHamiltonian
from .pauli import group_by_xmask


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def basis(cls, det: Determinant, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[det] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class ReferenceSet:
    """Determinants ``dets`` with real coefficients ``coeffs`` (same order)."""

    dets: list
    coeffs: np.ndarray

    def __post_init__(self):
        self.dets = [int(d) for d in self.dets]
        self.coeffs = np.asarray(self.coeffs, dtype=float).copy()
        if len(self.dets) != len(self.coeffs):
            raise ValueError("dets and coeffs differ in length")
        if not self.dets:
            raise ValueError("reference set is empty")
        if len(set(self.dets)) != len(self.dets):
            raise ValueError("duplicate determinants in reference set")
        if len({bin(d).count("1") for d in self.dets}) != 1:
            raise ValueError("determinants span several particle-number sectors")

    def __len__(self) -> int:
        return len(self.dets)

    @property
    def n_electrons(self) -> int:
        return bin(self.dets[0]).count("1")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "ReferenceSet":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("reference coefficients have zero norm")
        return ReferenceSet(self.dets, self.coeffs / nrm)

    def weights(self) -> Dict[Determinant, float]:
        return {d: float(c * c) for d, c in zip(self.dets, self.coeffs)}


# ---------------------------------------------------------------------------
# operators


def sparse_operator(H: QubitHamiltonian) -> sp.csr_matrix:
    """Sparse matrix of ``H`` built term by term from its Pauli strings."""
    dim = 1 << H.n_qubits
    basis = np.arange(dim)
    rows, cols, vals = [], [], []
    for x, d in group_by_xmask(H.n_qubits, H.terms):
        keep = np.abs(d) > 1e-14
        rows.append(basis[keep] ^ x)
        cols.append(basis[keep])
        vals.append(d[keep])
    data = np.concatenate(vals) if vals else np.zeros(0, dtype=complex)
    if data.size and np.max(np.abs(data.imag)) < 1e-14:
        data = data.real
    mat = sp.coo_matrix(
        (data, (np.concatenate(rows) if rows else [], np.concatenate(cols) if cols else [])),
        shape=(dim, dim),
    )
    return mat.tocsr()


_SPARSE_CACHE: Dict[int, Tuple[QubitHamiltonian, sp.csr_matrix]] = {}


def hamiltonian_matrix(H: QubitHamiltonian) -> sp.csr_matrix:
    """Cached :func:`sparse_operator` keyed on object identity."""
    hit = _SPARSE_CACHE.get(id(H))
    if hit is not None and hit[0] is H:
        return hit[1]
    mat = sparse_operator(H)
    if len(_SPARSE_CACHE) > 32:
        _SPARSE_CACHE.clear()
    _SPARSE_CACHE[id(H)] = (H, mat)
    return mat


def _annihilate_sign(states: np.ndarray, j: int) -> np.ndarray:
    below = states & ((1 << j) - 1)
    return 1 - 2 * (np.bitwise_count(below) & 1).astype(np.int64)


@lru_cache(maxsize=4096)
def excitation_pairs(exc: Excitation, n_qubits: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(src, dst, sign)`` with ``T |src> = sign |dst>`` for the excitation term ``T``."""
    dim = 1 << n_qubits
    if max(exc.from_ + exc.to) >= n_qubits:
        raise ValueError(f"{exc} does not fit on {n_qubits} qubits")
    basis = np.arange(dim, dtype=np.int64)
    fm, tm = exc.from_mask, exc.to_mask
    src = basis[((basis & fm) == fm) & ((basis & tm) == 0)]
    state = src.copy()
    sign = np.ones(src.shape, dtype=np.int64)
    for kind, j in reversed(exc.fermion_ops()):
        # both ladder operators carry the parity of the qubits below j
        sign *= _annihilate_sign(state, j)
        state ^= 1 << j
    src.setflags(write=False)
    state.setflags(write=False)
    fsign = sign.astype(float)
    fsign.setflags(write=False)
    return src, state, fsign


def _rotate(vec: np.ndarray, pairs, theta: float) -> None:
    src, dst, sign = pairs
    c, s = np.cos(theta), np.sin(theta)
    a = vec[src]
    b = vec[dst]
    vec[src] = c * a - s * sign * b
    vec[dst] = c * b + s * sign * a


def _apply_generator(vec: np.ndarray, pairs) -> np.ndarray:
    src, dst, sign = pairs
    out = np.zeros_like(vec)
    out[dst] = sign * vec[src]
    out[src] = -sign * vec[dst]
    return out


def generator_matrix(exc: Excitation, n_qubits: int) -> np.ndarray:
    """Dense anti-Hermitian generator ``T - T^dagger``; for tests and small systems."""
    src, dst, sign = excitation_pairs(exc, n_qubits)
    dim = 1 << n_qubits
    mat = np.zeros((dim, dim))
    mat[dst, src] = sign
    mat[src, dst] = -sign
    return mat


# ---------------------------------------------------------------------------
# public engine operations


def prepare_reference(ref: ReferenceSet, n_qubits: int) -> StateVector:
    """Place each coefficient at its determinant's basis index."""
    if abs(ref.norm() - 1.0) > 1e-10:
        raise ValueError(f"reference is not normalized (norm {ref.norm():.3e})")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    for d, c in zip(ref.dets, ref.coeffs):
        if d >> n_qubits:
            raise ValueError(f"determinant {d:b} needs more than {n_qubits} qubits")
        amps[d] = c
    return StateVector(n_qubits, amps)


def apply_excitation_exponential(state: StateVector, exc: Excitation, angle: float) -> StateVector:
    out = state.amplitudes.copy()
    _rotate(out, excitation_pairs(exc, state.n_qubits), angle)
    return StateVector(state.n_qubits, out)


def _check_params(theta, excs: ExcitationList) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(excs),):
        raise ValueError(f"expected {len(excs)} angles, got shape {theta.shape}")
    return theta


def apply_uccsd(state: StateVector, params, excs: ExcitationList) -> StateVector:
    """One Trotter layer: exponentials applied in list order (doubles, then singles)."""
    theta = _check_params(params, excs)
    out = state.amplitudes.copy()
    n = state.n_qubits
    for exc, t in zip(excs, theta):
        if t != 0.0:
            _rotate(out, excitation_pairs(exc, n), t)
    return StateVector(n, out)


def expectation(state: StateVector, H: QubitHamiltonian) -> float:
    if state.n_qubits != H.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, Hamiltonian {H.n_qubits}")
    psi = state.amplitudes
    val = np.vdot(psi, hamiltonian_matrix(H) @ psi)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def energy(ref: ReferenceSet, theta, excs: ExcitationList, H: QubitHamiltonian) -> float:
    """Rayleigh quotient of the trial state; invariant under rescaling ``c``."""
    theta = _check_params(theta, excs)
    cc = float(ref.coeffs @ ref.coeffs)
    if cc == 0.0:
        raise ValueError("zero coefficient vector")
    psi = _reference_vector(ref, H.n_qubits)
    for exc, t in zip(excs, theta):
        _rotate(psi, excitation_pairs(exc, H.n_qubits), t)
    return float(np.vdot(psi, hamiltonian_matrix(H) @ psi).real) / cc


def _reference_vector(ref: ReferenceSet, n_qubits: int) -> np.ndarray:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[np.asarray(ref.dets, dtype=np.int64)] = ref.coeffs
    return amps


def energy_and_gradients(
    ref: ReferenceSet, theta, excs: ExcitationList, H: QubitHamiltonian
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Energy plus exact gradients in ``theta`` and ``c`` from one adjoint sweep.

    Forward pass builds ``psi = U psi_init``.  The backward pass carries
    ``phi`` (the state after gate ``k``) and ``lam`` (``H psi`` pulled back to
    the same point); ``dE/dtheta_k = 2 Re <lam| kappa_k |phi> / c.c``.  After
    the sweep ``lam = U^dagger H U psi_init`` which gives the coefficient
    gradient of the Rayleigh quotient by reading determinant amplitudes.
    """
    theta = _check_params(theta, excs)
    n = H.n_qubits
    cc = float(ref.coeffs @ ref.coeffs)
    if cc == 0.0:
        raise ValueError("zero coefficient vector")
    pairs = [excitation_pairs(exc, n) for exc in excs]

    phi = _reference_vector(ref, n)
    for p, t in zip(pairs, theta):
        _rotate(phi, p, t)
    lam = hamiltonian_matrix(H) @ phi
    e = float(np.vdot(phi, lam).real) / cc

    g_theta = np.zeros(len(excs))
    for k in range(len(excs) - 1, -1, -1):
        src, dst, sign = pairs[k]
        # <lam| kappa |phi> restricted to the coupled pairs
        g_theta[k] = 2.0 * np.real(
            np.dot(sign, np.conj(lam[dst]) * phi[src] - np.conj(lam[src]) * phi[dst])
        )
        _rotate(phi, pairs[k], -theta[k])
        _rotate(lam, pairs[k], -theta[k])
    g_theta /= cc

    idx = np.asarray(ref.dets, dtype=np.int64)
    g_c = 2.0 * (lam[idx].real - e * ref.coeffs) / cc
    return e, g_theta, g_c


def grad_theta(ref: ReferenceSet, theta, excs: ExcitationList, H: QubitHamiltonian) -> np.ndarray:
    return energy_and_gradients(ref, theta, excs, H)[1]


def grad_coeffs(ref: ReferenceSet, theta, excs: ExcitationList, H: QubitHamiltonian) -> np.ndarray:
    return energy_and_gradients(ref, theta, excs, H)[2]


def trial_state(ref: ReferenceSet, theta, excs: ExcitationList, n_qubits: int) -> StateVector:
    """``U(theta)`` applied to the normalized reference."""
    return apply_uccsd(prepare_reference(ref.normalized(), n_qubits), theta, excs)


def sample_counts(state: StateVector, n_shots: int, seed) -> Dict[Determinant, int]:
    """Multinomial computational-basis measurement; ``seed`` may be an int or a Generator."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    counts = rng.multinomial(n_shots, probs)
    hit = np.flatnonzero(counts)
    return {int(b): int(counts[b]) for b in hit}


def exact_probabilities(state: StateVector, floor: float = 0.0) -> Dict[Determinant, float]:
    probs = state.probabilities()
    keep = np.flatnonzero(probs >= floor) if floor > 0 else np.arange(probs.size)
    return {int(b): float(probs[b]) for b in keep}


def apply_generator(state: StateVector, exc: Excitation) -> StateVector:
    """``kappa |state>`` for the excitation's anti-Hermitian generator."""
    return StateVector(state.n_qubits, _apply_generator(state.amplitudes, excitation_pairs(exc, state.n_qubits)))
