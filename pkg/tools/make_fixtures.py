"""Regenerate the bundled FCIDUMP fixtures with PySCF.

Not imported by the package; run manually when fixtures need rebuilding::

    python tools/make_fixtures.py

Writes ``src/cvqe/data/fixtures/*.fcidump`` plus ``provenance.json`` holding
geometry, basis, and the PySCF RHF/FCI energies used as external cross-checks.
"""

import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf
from pyscf.tools import fcidump

OUT = Path(__file__).resolve().parents[1] / "src" / "cvqe" / "data" / "fixtures"


def h2(d):
    return [("H", (0, 0, 0)), ("H", (0, 0, d))]


def hchain(n, d):
    return [("H", (0, 0, i * d)) for i in range(n)]


def beh2(d):
    return [("H", (0, 0, -d)), ("Be", (0, 0, 0)), ("H", (0, 0, d))]


def n2(d):
    return [("N", (0, 0, 0)), ("N", (0, 0, d))]


def full_space(name, atoms, d):
    mol = gto.M(atom=atoms, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    assert mf.converged, name
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    nmo = c.shape[1]
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), nmo)
    e_core = mol.energy_nuc()
    e_fci, _ = fci.FCI(mf).kernel()
    path = OUT / f"{name}.fcidump"
    fcidump.from_integrals(str(path), h1, eri, nmo, mol.nelectron, e_core, ms=0, tol=1e-14)
    return {
        "file": path.name,
        "geometry_angstrom": [[a, list(map(float, xyz))] for a, xyz in atoms],
        "bond_length_angstrom": d,
        "basis": "sto-3g",
        "n_spatial": int(nmo),
        "n_electrons": int(mol.nelectron),
        "e_rhf": float(mf.e_tot),
        "e_fci": float(e_fci),
    }


def active_space(name, atoms, d, ncas, nelecas):
    mol = gto.M(atom=atoms, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    assert mf.converged, name
    cas = mcscf.CASCI(mf, ncas, nelecas)
    h1, e_core = cas.get_h1eff()
    eri = ao2mo.restore(1, cas.get_h2eff(), ncas)
    e_casci = cas.kernel()[0]
    path = OUT / f"{name}.fcidump"
    fcidump.from_integrals(str(path), h1, eri, ncas, nelecas, e_core, ms=0, tol=1e-14)
    return {
        "file": path.name,
        "geometry_angstrom": [[a, list(map(float, xyz))] for a, xyz in atoms],
        "bond_length_angstrom": d,
        "basis": "sto-3g",
        "active_space": [nelecas, ncas],
        "n_spatial": ncas,
        "n_electrons": nelecas,
        "e_rhf": float(mf.e_tot),
        "e_fci": float(e_casci),
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    meta = {}
    meta["h2_0.735"] = full_space("h2_0.735", h2(0.735), 0.735)
    meta["h4_1.5"] = full_space("h4_1.5", hchain(4, 1.5), 1.5)
    for d in (1.0, 2.0, 2.5):
        meta[f"h6_{d}"] = full_space(f"h6_{d}", hchain(6, d), d)
    for d in (1.3, 2.0, 2.5):
        meta[f"beh2_{d}"] = full_space(f"beh2_{d}", beh2(d), d)
    for d in (1.1, 1.5, 2.0):
        meta[f"n2_{d}"] = active_space(f"n2_{d}", n2(d), d, 6, 6)
    (OUT / "provenance.json").write_text(json.dumps(meta, indent=2) + "\n")
    for k, v in meta.items():
        print(f"{k:10s} E_RHF={v['e_rhf']:.10f} E_FCI={v['e_fci']:.10f}")


if __name__ == "__main__":
    np.set_printoptions(precision=12)
    main()
