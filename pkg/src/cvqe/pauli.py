"""Pauli strings stored as (x-mask, z-mask) integer pairs.

Qubit ``j`` corresponds to bit ``j`` of both masks.  Letters map as
I=(0,0), X=(1,0), Z=(0,1), Y=(1,1).  A string with masks ``(x, z)`` denotes
the operator ``i**popcount(x & z) * X^x Z^z``, which makes every letter Y
equal to ``iXZ`` and keeps every string Hermitian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Tuple

import numpy as np

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if self.x < 0 or self.z < 0 or self.x >= limit or self.z >= limit:
            raise ValueError(f"masks out of range for {self.n_qubits} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a letter string, qubit 0 first (``"XIZ"`` is X0 Z2)."""
        x = z = 0
        for j, ch in enumerate(label.upper()):
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x |= bx << j
            z |= bz << j
        return cls(len(label), x, z)

    @classmethod
    def from_sparse(cls, n_qubits: int, ops: Mapping[int, str]) -> "PauliString":
        """Build from ``{qubit: letter}``; unspecified qubits are identity."""
        x = z = 0
        for j, ch in ops.items():
            if not 0 <= j < n_qubits:
                raise IndexError(f"qubit {j} out of range")
            bx, bz = _BITS[ch.upper()]
            x |= bx << j
            z |= bz << j
        return cls(n_qubits, x, z)

    @property
    def letters(self) -> str:
        return "".join(
            _LETTERS[((self.x >> j) & 1, (self.z >> j) & 1)] for j in range(self.n_qubits)
        )

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __mul__(self, other: "PauliString") -> Tuple[complex, "PauliString"]:
        """Return ``(phase, string)`` with ``self @ other == phase * string``."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        return pauli_product(self.n_qubits, self.x, self.z, other.x, other.z)

    def __str__(self) -> str:
        ops = [f"{ch}{j}" for j, ch in enumerate(self.letters) if ch != "I"]
        return " ".join(ops) if ops else "I"

    def to_matrix(self) -> np.ndarray:
        """Dense matrix in the little-endian computational basis."""
        dim = 1 << self.n_qubits
        basis = np.arange(dim)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[basis ^ self.x, basis] = _string_phases(self.x, self.z, basis)
        return mat


_IPOW = (1, 1j, -1, -1j)


def pauli_product(n: int, x1: int, z1: int, x2: int, z2: int) -> Tuple[complex, PauliString]:
    # X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
    x, z = x1 ^ x2, z1 ^ z2
    k = popcount(x1 & z1) + popcount(x2 & z2) - popcount(x & z) + 2 * popcount(z1 & x2)
    return _IPOW[k % 4], PauliString(n, x, z)


def _string_phases(x: int, z: int, basis: np.ndarray) -> np.ndarray:
    """Matrix elements <b^x| P |b> for every basis index ``b``."""
    parity = np.zeros(basis.shape, dtype=np.int64)
    zz = z
    j = 0
    while zz:
        if zz & 1:
            parity ^= (basis >> j) & 1
        zz >>= 1
        j += 1
    sign = 1 - 2 * parity
    return _IPOW[popcount(x & z) % 4] * sign


class PauliSum:
    """Mutable accumulator of complex-weighted Pauli strings on ``n`` qubits."""

    def __init__(self, n_qubits: int, terms: Iterable[Tuple[complex, PauliString]] = ()):
        self.n_qubits = n_qubits
        self._terms: Dict[Tuple[int, int], complex] = {}
        for coeff, p in terms:
            self.add(coeff, p)

    def add(self, coeff: complex, p: PauliString) -> None:
        key = (p.x, p.z)
        self._terms[key] = self._terms.get(key, 0.0) + coeff

    def __iter__(self) -> Iterator[Tuple[complex, PauliString]]:
        for (x, z), c in self._terms.items():
            yield c, PauliString(self.n_qubits, x, z)

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n_qubits, self)
        for c, p in other:
            out.add(c, p)
        return out

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, ((factor * c, p) for c, p in self))

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n_qubits)
        n = self.n_qubits
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                phase, p = pauli_product(n, x1, z1, x2, z2)
                out.add(phase * c1 * c2, p)
        return out

    def simplify(self, tol: float = 1e-12) -> "PauliSum":
        return PauliSum(self.n_qubits, ((c, p) for c, p in self if abs(c) >= tol))

    def as_dict(self) -> Dict[PauliString, complex]:
        return {p: c for c, p in self}

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for c, p in self:
            mat += c * p.to_matrix()
        return mat


def group_by_xmask(n_qubits: int, terms: Iterable[Tuple[complex, PauliString]]) -> List[Tuple[int, np.ndarray]]:
    """Collapse terms sharing an x-mask into one phase vector per mask.

    For each distinct ``x`` the returned vector ``d`` satisfies
    ``(sum of those terms)|b> = d[b] |b ^ x>``.
    """
    basis = np.arange(1 << n_qubits)
    groups: Dict[int, np.ndarray] = {}
    for c, p in terms:
        vec = c * _string_phases(p.x, p.z, basis)
        if p.x in groups:
            groups[p.x] = groups[p.x] + vec
        else:
            groups[p.x] = vec.astype(complex)
    return sorted(groups.items(), key=lambda kv: kv[0])
