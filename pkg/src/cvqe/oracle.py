"""Exact reference energies: FCI by sector-restricted Lanczos, and HF diagonals."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .ansatz import Determinant
from .fermion import QubitHamiltonian
from .statevector import hamiltonian_matrix


class LanczosNotConverged(RuntimeError):
    def __init__(self, estimate: float, residual: float, iterations: int):
        super().__init__(
            f"Lanczos did not converge in {iterations} steps "
            f"(estimate {estimate:.12f}, residual {residual:.2e})"
        )
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SectorBasis:
    n_qubits: int
    n_electrons: int
    indices: np.ndarray  # ascending bitmasks
    sz2: int = None  # twice Sz when filtered, else None

    @classmethod
    def build(cls, n_qubits: int, n_electrons: int, sz2: int = None) -> "SectorBasis":
        """All determinants with ``n_electrons`` set bits, optionally with ``2 Sz = sz2``.

        Even qubits carry alpha spin, odd qubits beta spin.
        """
        if not 0 <= n_electrons <= n_qubits:
            raise ValueError("n_electrons outside [0, n_qubits]")
        dets = sorted(sum(1 << j for j in occ) for occ in combinations(range(n_qubits), n_electrons))
        if sz2 is not None:
            alpha = sum(1 << j for j in range(0, n_qubits, 2))
            dets = [
                d for d in dets
                if bin(d & alpha).count("1") - bin(d & ~alpha).count("1") == sz2
            ]
        idx = np.asarray(dets, dtype=np.int64)
        idx.setflags(write=False)
        return cls(n_qubits, n_electrons, idx, sz2)

    def __len__(self) -> int:
        return len(self.indices)


def sector_matrix(H: QubitHamiltonian, sector: SectorBasis):
    if H.n_qubits != sector.n_qubits:
        raise ValueError("Hamiltonian and sector disagree on qubit count")
    mat = hamiltonian_matrix(H)
    idx = sector.indices
    return mat[idx][:, idx].tocsr()


def lanczos_ground(matvec, dim: int, tol: float = 1e-9, max_iter: int = 500, seed: int = 0):
    """Lowest eigenpair of a real symmetric operator by Lanczos with full reorthogonalisation.

    Returns ``(eigenvalue, residual_norm, iterations)``.  Convergence is on the
    Ritz residual ``||A x - lambda x|| = beta_k |y_k|``.
    """
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    max_iter = min(max_iter, dim)
    Q = np.zeros((max_iter + 1, dim))
    Q[0] = q
    alphas, betas = [], []
    theta, resid = np.inf, np.inf
    for k in range(max_iter):
        w = np.real(matvec(Q[k]))
        a = float(Q[k] @ w)
        alphas.append(a)
        w -= Q[: k + 1].T @ (Q[: k + 1] @ w)
        w -= Q[: k + 1].T @ (Q[: k + 1] @ w)  # second pass keeps orthogonality at machine level
        b = float(np.linalg.norm(w))
        if k == 0:
            vals, vecs = np.array([a]), np.ones((1, 1))
        else:
            vals, vecs = eigh_tridiagonal(np.array(alphas), np.array(betas), select="i", select_range=(0, 0))
        theta = float(vals[0])
        resid = abs(b * vecs[-1, 0])
        if resid < tol or b < 1e-14 or k + 1 == dim:
            return theta, resid if b >= 1e-14 else 0.0, k + 1
        betas.append(b)
        Q[k + 1] = w / b
    raise LanczosNotConverged(theta, resid, max_iter)


def fci_ground_energy(
    H: QubitHamiltonian, sector: SectorBasis, tol: float = 1e-9, max_iter: int = 500
) -> float:
    """Lowest eigenvalue of ``H`` within ``sector``."""
    mat = sector_matrix(H, sector)
    dim = len(sector)
    if dim == 1:
        return float(mat[0, 0].real)
    e, _, _ = lanczos_ground(lambda v: mat @ v, dim, tol=tol, max_iter=max_iter)
    return e


def hf_energy(H: QubitHamiltonian, hf: Determinant) -> float:
    if hf >> H.n_qubits:
        raise ValueError("determinant does not fit the Hamiltonian")
    return float(hamiltonian_matrix(H)[hf, hf].real)
