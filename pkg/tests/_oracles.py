"""Independent reference constructions used only by the tests.

Nothing here goes through the Pauli/JW code paths of the package.
"""

import itertools

import numpy as np


def apply_ladder(kind, j, det):
    """Act with a creation ('+') or annihilation ('-') operator on an occupation int.

    Returns (sign, new_det) or None when the result vanishes.  Sign follows the
    normal ordering convention of counting occupied modes with index < j.
    """
    occ = (det >> j) & 1
    if (kind == "+" and occ) or (kind == "-" and not occ):
        return None
    sign = -1 if bin(det & ((1 << j) - 1)).count("1") % 2 else 1
    return sign, det ^ (1 << j)


def apply_string(ops, det):
    """Apply ops (leftmost first) to a determinant; rightmost acts first."""
    sign = 1
    for kind, j in reversed(ops):
        res = apply_ladder(kind, j, det)
        if res is None:
            return None
        s, det = res
        sign *= s
    return sign, det


def fermion_matrix(terms, n_qubits):
    """Dense matrix of sum_k coeff_k * ops_k in the occupation basis."""
    dim = 1 << n_qubits
    mat = np.zeros((dim, dim))
    for coeff, ops in terms:
        for det in range(dim):
            res = apply_string(ops, det)
            if res is not None:
                mat[res[1], det] += coeff * res[0]
    return mat


def second_quantized_matrix(h, v_chem, e_core):
    """Electronic Hamiltonian assembled directly from one- and two-body integrals."""
    n = h.shape[0]
    nq = 2 * n
    terms = [(e_core, [])]
    for p, q in itertools.product(range(n), repeat=2):
        for s in (0, 1):
            terms.append((h[p, q], [("+", 2 * p + s), ("-", 2 * q + s)]))
    for p, q, r, s in itertools.product(range(n), repeat=4):
        v = v_chem[p, r, q, s]  # physicists' <pq|rs> = (pr|qs)
        if v == 0.0:
            continue
        for a, b in itertools.product((0, 1), repeat=2):
            terms.append((0.5 * v, [("+", 2 * p + a), ("+", 2 * q + b), ("-", 2 * s + b), ("-", 2 * r + a)]))
    return fermion_matrix(terms, nq)


def pauli_decompose(mat):
    """{label: coeff} of a dense 2^n matrix via trace inner products."""
    n = int(np.log2(mat.shape[0]))
    single = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1, -1]),
    }
    out = {}
    for letters in itertools.product("IXYZ", repeat=n):
        # qubit 0 is the least significant bit -> rightmost Kronecker factor
        op = np.array([[1.0]])
        for ch in letters:
            op = np.kron(single[ch], op)
        c = np.trace(op.conj().T @ mat) / mat.shape[0]
        if abs(c) > 1e-12:
            out["".join(letters)] = c
    return out


def random_integrals(n, rng, scale=0.5):
    """Random real integrals with full 8-fold symmetry."""
    h = rng.normal(scale=scale, size=(n, n))
    h = h + h.T
    v = rng.normal(scale=scale, size=(n, n, n, n))
    perms = [
        (0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
        (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
    ]
    v = sum(v.transpose(p) for p in perms) / 8
    return h, v


def number_operator(n_qubits):
    dim = 1 << n_qubits
    return np.diag([bin(b).count("1") for b in range(dim)]).astype(float)


def finite_difference(f, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        g[k] = (f(x + e) - f(x - e)) / (2 * step)
    return g
