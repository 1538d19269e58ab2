#!/usr/bin/env python3
"""Regenerate the FCIDUMP fixture set and manifest.json.

Integrals are produced with PySCF (RHF/STO-3G, Cartesian-free default
settings). Each molecule is scanned in ascending bond length and the RHF
density of the previous point seeds the next SCF so the reference stays
on one continuous solution branch. Orbitals are written in canonical RHF
order. N2 freezes its four lowest MOs (1s and 2s combinations) into an
effective core energy and dressed one-electron integrals.

Usage: python3 fixtures/generate_fixtures.py   (from the repository root)
"""

import hashlib
import json
import os

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf, tools
from pyscf import __version__ as pyscf_version

HERE = os.path.dirname(os.path.abspath(__file__))


def grid(lo, hi, step, extra=()):
    n = int(round((hi - lo) / step))
    pts = {round(lo + i * step, 4) for i in range(n + 1)}
    pts.update(extra)
    return sorted(pts)


def chain(symbol, n, r):
    return [(symbol, (i * r, 0.0, 0.0)) for i in range(n)]


MOLECULES = [
    {
        "name": "h2",
        "geometry": "linear H-H, R = H-H distance",
        "atoms": lambda r: chain("H", 2, r),
        "grid": grid(0.5, 2.5, 0.1, extra=(0.7414,)),
        "frozen": 0,
    },
    {
        "name": "h4",
        "geometry": "linear equally spaced H4 chain, R = nearest-neighbour distance",
        "atoms": lambda r: chain("H", 4, r),
        "grid": grid(0.5, 3.0, 0.1),
        "frozen": 0,
    },
    {
        "name": "h6",
        "geometry": "linear equally spaced H6 chain, R = nearest-neighbour distance",
        "atoms": lambda r: chain("H", 6, r),
        "grid": grid(0.5, 3.0, 0.1),
        "frozen": 0,
    },
    {
        "name": "lih",
        "geometry": "Li at origin, H on +x, R = Li-H distance",
        "atoms": lambda r: [("Li", (0.0, 0.0, 0.0)), ("H", (r, 0.0, 0.0))],
        "grid": grid(0.8, 4.0, 0.2),
        "frozen": 0,
    },
    {
        "name": "beh2",
        "geometry": "linear symmetric H-Be-H, R = Be-H distance",
        "atoms": lambda r: [
            ("H", (-r, 0.0, 0.0)),
            ("Be", (0.0, 0.0, 0.0)),
            ("H", (r, 0.0, 0.0)),
        ],
        "grid": grid(0.8, 4.0, 0.2),
        "frozen": 0,
    },
    {
        "name": "n2",
        "geometry": "N-N along x, R = N-N distance; 1s and 2s MOs frozen",
        "atoms": lambda r: [("N", (0.0, 0.0, 0.0)), ("N", (r, 0.0, 0.0))],
        "grid": grid(0.8, 4.0, 0.1),
        "frozen": 4,
    },
]


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def run_molecule(spec):
    outdir = os.path.join(HERE, spec["name"])
    os.makedirs(outdir, exist_ok=True)
    points = []
    dm = None
    for r in spec["grid"]:
        mol = gto.M(atom=spec["atoms"](r), basis="sto-3g", unit="Angstrom",
                    symmetry=False, verbose=0)
        mf = scf.RHF(mol)
        mf.conv_tol = 1e-11
        mf.max_cycle = 500
        e_rhf = mf.kernel(dm0=dm)
        if not mf.converged:
            mf = scf.newton(mf)
            e_rhf = mf.kernel(mf.mo_coeff, mf.mo_occ)
        dm = mf.make_rdm1()
        fname = "%s_r%.4f.fcidump" % (spec["name"], r)
        path = os.path.join(outdir, fname)
        nfrozen = spec["frozen"]
        if nfrozen == 0:
            nmo = mf.mo_coeff.shape[1]
            nelec = mol.nelectron
            h1 = mf.mo_coeff.T @ mf.get_hcore() @ mf.mo_coeff
            eri = ao2mo.restore(1, ao2mo.kernel(mol, mf.mo_coeff), nmo)
            ecore = mol.energy_nuc()
            e_fci, _ = fci.direct_spin1.kernel(h1, eri, nmo, nelec, ecore=ecore,
                                               conv_tol=1e-12)
        else:
            nmo = mf.mo_coeff.shape[1] - nfrozen
            nelec = mol.nelectron - 2 * nfrozen
            mc = mcscf.CASCI(mf, nmo, nelec)
            mc.fcisolver.conv_tol = 1e-12
            h1, ecore = mc.get_h1eff()
            eri = ao2mo.restore(1, mc.get_h2eff(), nmo)
            e_fci = mc.kernel()[0]
        tools.fcidump.from_integrals(path, h1, eri, nmo, nelec, nuc=ecore,
                                     ms=0, tol=1e-15, float_format=" %.17g")
        points.append({
            "r_angstrom": r,
            "file": "%s/%s" % (spec["name"], fname),
            "sha256": sha256(path),
            "rhf_energy": float(e_rhf),
            "fci_energy": float(e_fci),
            "rhf_converged": bool(mf.converged),
        })
        print("%-5s R=%.4f  E_RHF=%.10f  E_FCI=%.10f" % (spec["name"], r, e_rhf, e_fci))
    return {
        "molecule": spec["name"],
        "geometry": spec["geometry"],
        "basis": "STO-3G",
        "frozen_orbitals": spec["frozen"],
        "n_spatial": nmo,
        "n_electrons": nelec,
        "dissociation_reference": points[-1]["fci_energy"],
        "points": points,
    }


def main():
    manifest = {
        "producer": "PySCF %s RHF (conv_tol 1e-11), direct_spin1/CASCI FCI (conv_tol 1e-12)"
                    % pyscf_version,
        "generator": "fixtures/generate_fixtures.py",
        "units": {"length": "angstrom", "energy": "hartree"},
        "orbital_order": "canonical RHF (ascending orbital energy)",
        "molecules": [run_molecule(m) for m in MOLECULES],
    }
    with open(os.path.join(HERE, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
