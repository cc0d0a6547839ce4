"""Molecular integrals, FCIDUMP ingestion and the Jordan-Wigner qubit Hamiltonian.

Spin-orbital convention (used everywhere in the package): spatial orbital
``p`` with alpha spin lives on qubit ``2p`` and with beta spin on ``2p + 1``.
Orbitals are taken in file order, which for canonical orbitals is increasing
orbital energy, so the Hartree-Fock determinant is a contiguous block of
occupied low qubits.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from .pauli import PauliString, PauliSum

PRUNE_TOL = 1e-12
_DUPLICATE_TOL = 1e-10


class FCIDumpError(ValueError):
    """Malformed or inconsistent FCIDUMP input."""


class FCIDumpIndexError(FCIDumpError, IndexError):
    """Orbital index outside ``[0, NORB]``."""


@dataclass
class OrbitalIntegrals:
    """One- and two-electron integrals over spatial orbitals (Hartree).

    ``h[p, q]`` is the one-electron integral and ``v_chem[p, q, r, s]`` the
    two-electron integral (pq|rs) in chemists' notation.
    """

    n_spatial: int
    n_electrons: int
    ms2: int
    h: np.ndarray
    v_chem: np.ndarray
    e_core: float = 0.0
    orbsym: List[int] = field(default_factory=list)

    def __post_init__(self):
        n = self.n_spatial
        self.h = np.asarray(self.h, dtype=float)
        self.v_chem = np.asarray(self.v_chem, dtype=float)
        if self.h.shape != (n, n) or self.v_chem.shape != (n, n, n, n):
            raise ValueError("integral shapes do not match n_spatial")
        if not 0 <= self.n_electrons <= 2 * n:
            raise ValueError(f"n_electrons={self.n_electrons} outside [0, {2 * n}]")

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_spatial

    def check_symmetry(self, tol: float = 1e-12) -> None:
        """Raise if ``h`` or ``v_chem`` break the real-orbital permutation symmetry."""
        if np.max(np.abs(self.h - self.h.T), initial=0.0) > tol:
            raise ValueError("one-electron integrals are not symmetric")
        v = self.v_chem
        for perm in _EIGHTFOLD_AXES:
            if np.max(np.abs(v - v.transpose(perm)), initial=0.0) > tol:
                raise ValueError("two-electron integrals break 8-fold symmetry")

    def shifted(self, delta: float) -> "OrbitalIntegrals":
        """Copy with ``e_core`` increased by ``delta``."""
        return OrbitalIntegrals(
            self.n_spatial, self.n_electrons, self.ms2, self.h.copy(),
            self.v_chem.copy(), self.e_core + delta, list(self.orbsym),
        )


# axis permutations of (p, q, r, s) generating the 8-fold symmetry group
_EIGHTFOLD_AXES = [
    (0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
    (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
]


def _eightfold(p, q, r, s):
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def _parse_header(text: str, first_line: int) -> Dict[str, str]:
    body = re.sub(r"&FCI|&END", " ", text, flags=re.IGNORECASE)
    parts = re.split(r"([A-Za-z_]\w*)\s*=", body)
    if parts[0].strip(" ,/\n"):
        raise FCIDumpError(f"line {first_line}: unexpected header text {parts[0].strip()!r}")
    fields = {}
    for key, value in zip(parts[1::2], parts[2::2]):
        fields[key.upper()] = " ".join(value.replace("/", " ").split()).strip(" ,")
    for required in ("NORB", "NELEC"):
        if required not in fields:
            raise FCIDumpError(f"line {first_line}: header is missing {required}")
    return fields


def _header_int(fields: Dict[str, str], key: str, line: int, default=None) -> int:
    if key not in fields:
        if default is None:
            raise FCIDumpError(f"line {line}: header is missing {key}")
        return default
    try:
        return int(fields[key])
    except ValueError:
        raise FCIDumpError(f"line {line}: bad {key} value {fields[key]!r}") from None


def _looks_like_data(line: str) -> bool:
    toks = line.split()
    if len(toks) != 5:
        return False
    try:
        float(toks[0].replace("D", "E").replace("d", "e"))
        [int(t) for t in toks[1:]]
    except ValueError:
        return False
    return True


def parse_fcidump(text: Union[str, Iterable[str]]) -> OrbitalIntegrals:
    """Parse FCIDUMP text into :class:`OrbitalIntegrals`.

    Accepts a string or an iterable of lines.  Indices are 1-based; ``k = l = 0``
    rows are one-electron integrals, an all-zero index row is the core energy
    and rows with ``j = k = l = 0`` (orbital energies) are ignored.  ORBSYM and
    ISYM are read but have no effect on the Hamiltonian.
    """
    lines = text.splitlines() if isinstance(text, str) else [ln.rstrip("\n") for ln in text]
    start = None
    for i, line in enumerate(lines):
        if re.search(r"&END|^\s*/\s*$", line, flags=re.IGNORECASE):
            start = i + 1
            break
        if _looks_like_data(line):
            start = i
            break
    if start is None or start == 0:
        raise FCIDumpError("line 1: missing FCIDUMP header")
    header_lines = lines[:start]
    fields = _parse_header("\n".join(header_lines), 1)
    norb = _header_int(fields, "NORB", 1)
    nelec = _header_int(fields, "NELEC", 1)
    ms2 = _header_int(fields, "MS2", 1, default=0)
    if norb <= 0:
        raise FCIDumpError(f"line 1: NORB must be positive, got {norb}")
    orbsym = []
    if fields.get("ORBSYM"):
        orbsym = [int(t) for t in fields["ORBSYM"].replace(",", " ").split()]

    h = np.zeros((norb, norb))
    v = np.zeros((norb, norb, norb, norb))
    seen_h: Dict[Tuple[int, int], float] = {}
    seen_v: Dict[Tuple[int, ...], float] = {}
    e_core = None

    for lineno, line in enumerate(lines[start:], start=start + 1):
        toks = line.split()
        if not toks:
            continue
        if len(toks) != 5:
            raise FCIDumpError(f"line {lineno}: expected 'value i j k l', got {line.strip()!r}")
        try:
            val = float(toks[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in toks[1:])
        except ValueError:
            raise FCIDumpError(f"line {lineno}: cannot parse {line.strip()!r}") from None
        for idx in (i, j, k, l):
            if not 0 <= idx <= norb:
                raise FCIDumpIndexError(f"line {lineno}: orbital index {idx} outside [0, {norb}]")

        if i == j == k == l == 0:
            if e_core is not None and abs(e_core - val) > _DUPLICATE_TOL:
                raise FCIDumpError(f"line {lineno}: conflicting core energy")
            e_core = val
        elif k == l == 0 and j != 0:
            key = (min(i, j) - 1, max(i, j) - 1)
            if key in seen_h and abs(seen_h[key] - val) > _DUPLICATE_TOL:
                raise FCIDumpError(f"line {lineno}: conflicting one-electron entry {i} {j}")
            seen_h[key] = val
            p, q = key
            h[p, q] = h[q, p] = val
        elif j == k == l == 0:
            continue  # orbital energy row
        elif 0 in (i, j, k, l):
            raise FCIDumpError(f"line {lineno}: malformed index pattern {i} {j} {k} {l}")
        else:
            perms = _eightfold(i - 1, j - 1, k - 1, l - 1)
            key = min(perms)
            if key in seen_v and abs(seen_v[key] - val) > _DUPLICATE_TOL:
                raise FCIDumpError(f"line {lineno}: conflicting two-electron entry {i} {j} {k} {l}")
            seen_v[key] = val
            for perm in perms:
                v[perm] = val

    return OrbitalIntegrals(norb, nelec, ms2, h, v, e_core or 0.0, orbsym)


def read_fcidump(path: Union[str, Path]) -> OrbitalIntegrals:
    with open(path) as fh:
        return parse_fcidump(fh.read())


def write_fcidump(ints: OrbitalIntegrals, tol: float = 1e-15) -> str:
    """Serialise integrals to FCIDUMP text (unique 8-fold entries only)."""
    n = ints.n_spatial
    out = [f" &FCI NORB={n},NELEC={ints.n_electrons},MS2={ints.ms2},"]
    out.append("  ORBSYM=" + ",".join(str(s) for s in (ints.orbsym or [1] * n)) + ",")
    out.append("  ISYM=1,")
    out.append(" &END")
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    val = ints.v_chem[i, j, k, l]
                    if abs(val) > tol:
                        out.append(f"{val:.17g} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            if abs(ints.h[i, j]) > tol:
                out.append(f"{ints.h[i, j]:.17g} {i + 1} {j + 1} 0 0")
    out.append(f"{ints.e_core:.17g} 0 0 0 0")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Jordan-Wigner


def jordan_wigner(op_kind: str, spin_orbital: int, n_qubits: int) -> List[Tuple[complex, PauliString]]:
    """JW image of a single ladder operator.

    ``a_j^dagger -> Z_0..Z_{j-1} (X_j - i Y_j) / 2`` and
    ``a_j -> Z_0..Z_{j-1} (X_j + i Y_j) / 2``.
    """
    if not 0 <= spin_orbital < n_qubits:
        raise IndexError(f"spin orbital {spin_orbital} out of range for {n_qubits} qubits")
    if op_kind not in ("creation", "annihilation"):
        raise ValueError(f"op_kind must be 'creation' or 'annihilation', not {op_kind!r}")
    bit = 1 << spin_orbital
    zstring = bit - 1
    sign = -1 if op_kind == "creation" else 1
    return [
        (0.5, PauliString(n_qubits, bit, zstring)),
        (sign * 0.5j, PauliString(n_qubits, bit, zstring | bit)),
    ]


def ladder(op_kind: str, spin_orbital: int, n_qubits: int) -> PauliSum:
    return PauliSum(n_qubits, jordan_wigner(op_kind, spin_orbital, n_qubits))


def fermion_product(ops: Iterable[Tuple[str, int]], n_qubits: int) -> PauliSum:
    """JW image of a product of ladder operators, leftmost first.

    ``ops`` items are ``("+", j)`` for creation and ``("-", j)`` for annihilation.
    """
    out = PauliSum(n_qubits, [(1.0, PauliString(n_qubits))])
    for kind, j in ops:
        out = out @ ladder("creation" if kind == "+" else "annihilation", j, n_qubits)
    return out.simplify(PRUNE_TOL)


@dataclass
class QubitHamiltonian:
    """Real-weighted sum of Pauli strings."""

    n_qubits: int
    terms: List[Tuple[float, PauliString]]

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_pauli_sum(cls, ps: PauliSum, tol: float = PRUNE_TOL) -> "QubitHamiltonian":
        terms = []
        for c, p in ps:
            if abs(c.imag) >= tol:
                raise ValueError(f"non-real coefficient {c} on {p}")
            if abs(c.real) >= tol:
                terms.append((float(c.real), p))
        terms.sort(key=lambda t: (t[1].x, t[1].z))
        return cls(ps.n_qubits, terms)

    def coefficient(self, p: PauliString) -> float:
        for c, q in self.terms:
            if q == p:
                return c
        return 0.0

    def shifted(self, delta: float) -> "QubitHamiltonian":
        ps = PauliSum(self.n_qubits, self.terms)
        ps.add(delta, PauliString(self.n_qubits))
        return QubitHamiltonian.from_pauli_sum(ps)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; only for small systems and tests."""
        return self.to_sparse().toarray().astype(complex)

    def to_sparse(self):
        from .statevector import sparse_operator

        return sparse_operator(self)


def _excitation_ops(n_qubits: int) -> List[List[PauliSum]]:
    """Table of ``E[p][q] = a_p^dagger a_q`` in qubit form."""
    create = [ladder("creation", j, n_qubits) for j in range(n_qubits)]
    annih = [ladder("annihilation", j, n_qubits) for j in range(n_qubits)]
    return [[(create[p] @ annih[q]).simplify(PRUNE_TOL) for q in range(n_qubits)] for p in range(n_qubits)]


def build_qubit_hamiltonian(ints: OrbitalIntegrals, tol: float = PRUNE_TOL) -> QubitHamiltonian:
    """Second-quantised electronic Hamiltonian mapped with Jordan-Wigner.

    Uses physicists' integrals ``v_pqrs = (pr|qs)`` and the identity
    ``a+_P a+_Q a_S a_R = E_PR E_QS - delta_QR E_PS`` over spin orbitals.
    """
    n = ints.n_spatial
    nq = 2 * n
    E = _excitation_ops(nq)
    acc = PauliSum(nq, [(ints.e_core, PauliString(nq))])

    for p, q in itertools.product(range(n), repeat=2):
        hpq = ints.h[p, q]
        if abs(hpq) < 1e-15:
            continue
        for s in (0, 1):
            for c, ps in E[2 * p + s][2 * q + s]:
                acc.add(hpq * c, ps)

    # collect 0.5 * v_pqrs over spin-orbital products before expanding the Paulis
    two_body: Dict[Tuple[int, int, int, int], float] = {}
    for p, q, r, s in itertools.product(range(n), repeat=4):
        vpqrs = ints.v_chem[p, r, q, s]
        if abs(vpqrs) < 1e-15:
            continue
        for sig, tau in itertools.product((0, 1), repeat=2):
            P, Q, R, S = 2 * p + sig, 2 * q + tau, 2 * r + sig, 2 * s + tau
            if P == Q or R == S:
                continue  # a+_P a+_P = 0
            key = (P, Q, R, S)
            two_body[key] = two_body.get(key, 0.0) + 0.5 * vpqrs

    # E_PR E_QS products, with the contraction term folded into one-body weights
    one_body: Dict[Tuple[int, int], float] = {}
    pair_weights: Dict[Tuple[int, int, int, int], float] = {}
    for (P, Q, R, S), w in two_body.items():
        pair_weights[(P, R, Q, S)] = pair_weights.get((P, R, Q, S), 0.0) + w
        if Q == R:
            one_body[(P, S)] = one_body.get((P, S), 0.0) - w
    for (P, S), w in one_body.items():
        for c, ps in E[P][S]:
            acc.add(w * c, ps)
    for (P, R, Q, S), w in pair_weights.items():
        if abs(w) < 1e-15:
            continue
        prod = E[P][R] @ E[Q][S]
        for c, ps in prod:
            acc.add(w * c, ps)
    return QubitHamiltonian.from_pauli_sum(acc, tol)
