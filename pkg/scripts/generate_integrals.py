"""Regenerate the bundled integral fixtures with PySCF (development only).

    python3 scripts/generate_integrals.py

Writes into src/vqebench/data/. PySCF is not a runtime dependency.
"""

import json
from pathlib import Path

from pyscf import ao2mo, gto, scf
from pyscf.tools import fcidump

from vqebench.integrals import spatial_to_spin, write_integrals

DATA = Path(__file__).resolve().parents[1] / "src" / "vqebench" / "data"

NAH_R = [1.5, 1.914388, 2.5, 3.2]
H2_R = 0.7414


def rhf(atom: str):
    mol = gto.M(atom=atom, basis="sto-3g", unit="angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    assert mf.converged
    return mol, mf


def h2_text(path: Path, r: float) -> None:
    mol, mf = rhf(f"H 0 0 0; H 0 0 {r}")
    c = mf.mo_coeff
    h = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])
    ints = spatial_to_spin(h, eri, mol.energy_nuc(), mol.nelectron)
    header = f"H2 STO-3G, R = {r} Angstrom, RHF orbitals (pyscf)"
    write_integrals(ints, path, comment=header)


def nah_fcidump(path: Path, r: float) -> None:
    _, mf = rhf(f"Na 0 0 0; H 0 0 {r}")
    fcidump.from_scf(mf, str(path), tol=1e-12)


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    h2_text(DATA / "h2_sto3g.txt", H2_R)
    nah_fcidump(DATA / "nah_sto3g.fcidump", 1.914388)
    points = []
    for r in NAH_R:
        name = f"nah_r{r:.3f}.fcidump"
        nah_fcidump(DATA / name, r)
        points.append({"label": f"{r:g}", "r": r, "integrals": name})
    (DATA / "nah_scan.json").write_text(json.dumps({"points": points}, indent=2) + "\n")


if __name__ == "__main__":
    main()
