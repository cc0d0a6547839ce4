"""Spin-conserving UCCSD excitations relative to the Hartree-Fock determinant.

Qubit ``2p`` is orbital ``p`` with alpha spin and ``2p + 1`` the beta one, so
the spin of spin-orbital ``j`` is ``j % 2`` and the Hartree-Fock determinant
occupies qubits ``0 .. n_electrons - 1``.

A single excitation ``r -> p`` generates ``a+_p a_r - h.c.``; a double
excitation ``(s, r) -> (q, p)`` with ``s < r`` and ``q < p`` generates
``a+_p a+_q a_r a_s - h.c.``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Tuple

Determinant = int  # occupation bitmask, bit j <-> spin orbital / qubit j


def det_from_bits(bits: str) -> Determinant:
    """``"1100"`` (qubit 0 first) -> bitmask."""
    return sum(1 << j for j, ch in enumerate(bits) if ch == "1")


def det_to_bits(det: Determinant, n_qubits: int) -> str:
    return "".join("1" if (det >> j) & 1 else "0" for j in range(n_qubits))


def excitation_rank(det: Determinant, ref: Determinant) -> int:
    return bin(det ^ ref).count("1") // 2


@dataclass(frozen=True)
class Excitation:
    kind: str  # "single" or "double"
    from_: Tuple[int, ...]  # occupied spin orbitals, ascending
    to: Tuple[int, ...]  # virtual spin orbitals, ascending

    def __post_init__(self):
        want = {"single": 1, "double": 2}.get(self.kind)
        if want is None:
            raise ValueError(f"unknown excitation kind {self.kind!r}")
        if len(self.from_) != want or len(self.to) != want:
            raise ValueError(f"{self.kind} excitation needs {want} indices on each side")
        if len(set(self.from_) | set(self.to)) != 2 * want:
            raise ValueError("excitation indices must be distinct")
        if tuple(sorted(self.from_)) != self.from_ or tuple(sorted(self.to)) != self.to:
            raise ValueError("excitation indices must be ascending")

    @property
    def from_mask(self) -> int:
        return sum(1 << j for j in self.from_)

    @property
    def to_mask(self) -> int:
        return sum(1 << j for j in self.to)

    def conserves_sz(self) -> bool:
        return sorted(j % 2 for j in self.from_) == sorted(j % 2 for j in self.to)

    def fermion_ops(self) -> List[Tuple[str, int]]:
        """Ladder operators of the excitation term, leftmost first."""
        if self.kind == "single":
            (r,), (p,) = self.from_, self.to
            return [("+", p), ("-", r)]
        (s, r), (q, p) = self.from_, self.to
        return [("+", p), ("+", q), ("-", r), ("-", s)]

    def apply_to(self, det: Determinant) -> Determinant:
        """Occupation after moving electrons ``from_ -> to`` (no sign)."""
        if det & self.from_mask != self.from_mask or det & self.to_mask:
            raise ValueError("excitation does not act on this determinant")
        return det ^ self.from_mask ^ self.to_mask

    def __str__(self) -> str:
        return f"{self.kind}{list(self.from_)}->{list(self.to)}"


@dataclass(frozen=True)
class ExcitationList:
    excitations: Tuple[Excitation, ...]
    n_spin_orbitals: int

    @property
    def n_params(self) -> int:
        return len(self.excitations)

    def __len__(self) -> int:
        return len(self.excitations)

    def __iter__(self) -> Iterator[Excitation]:
        return iter(self.excitations)

    def __getitem__(self, k: int) -> Excitation:
        return self.excitations[k]

    @property
    def n_doubles(self) -> int:
        return sum(e.kind == "double" for e in self.excitations)

    @property
    def n_singles(self) -> int:
        return sum(e.kind == "single" for e in self.excitations)


def _check_counts(n_electrons: int, n_spin_orbitals: int) -> None:
    if n_spin_orbitals <= 0 or n_spin_orbitals % 2:
        raise ValueError(f"n_spin_orbitals must be a positive even number, got {n_spin_orbitals}")
    if not 0 < n_electrons < n_spin_orbitals:
        raise ValueError(
            f"need 0 < n_electrons < n_spin_orbitals, got {n_electrons} and {n_spin_orbitals}"
        )


def hf_determinant(n_electrons: int, n_spin_orbitals: int) -> Determinant:
    _check_counts(n_electrons, n_spin_orbitals)
    return (1 << n_electrons) - 1


def enumerate_excitations(n_electrons: int, n_spin_orbitals: int) -> ExcitationList:
    """All Sz-conserving singles and doubles out of the HF determinant.

    Ordered doubles first, then singles; each block sorted by ``(to, from_)``.
    That order is also the application order of the one-layer Trotter product.
    """
    _check_counts(n_electrons, n_spin_orbitals)
    occ = range(n_electrons)
    vir = range(n_electrons, n_spin_orbitals)

    singles = [
        Excitation("single", (r,), (p,)) for r in occ for p in vir if r % 2 == p % 2
    ]
    doubles = []
    for frm in itertools.combinations(occ, 2):
        for to in itertools.combinations(vir, 2):
            exc = Excitation("double", frm, to)
            if exc.conserves_sz():
                doubles.append(exc)

    def key(e):
        return (e.to, e.from_)

    ordered = sorted(doubles, key=key) + sorted(singles, key=key)
    return ExcitationList(tuple(ordered), n_spin_orbitals)
