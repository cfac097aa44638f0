"""Jordan-Wigner mapping of fermionic operators onto qubits."""

from __future__ import annotations

from functools import lru_cache

from ..integrals import FermionOp
from .operators import PauliSum, PauliTerm


@lru_cache(maxsize=None)
def _ladder(p: int, creation: bool) -> tuple[PauliTerm, PauliTerm]:
    # a^_p = 1/2 (X_p - i Y_p) Z_{p-1} ... Z_0 ;  a_p = 1/2 (X_p + i Y_p) Z_{p-1} ... Z_0
    z = {q: "Z" for q in range(p)}
    sign = -1j if creation else 1j
    return PauliTerm(0.5, {**z, p: "X"}), PauliTerm(0.5 * sign, {**z, p: "Y"})


def jordan_wigner_ladder(p: int, creation: bool, n_qubits: int | None = None) -> PauliSum:
    """Qubit image of a single creation or annihilation operator."""
    return PauliSum(_ladder(p, creation), n_qubits if n_qubits is not None else p + 1)


def jordan_wigner(op: FermionOp, n_spin_orbitals: int) -> PauliSum:
    """Map ``op`` to a :class:`PauliSum` on ``n_spin_orbitals`` qubits.

    Parity strings run over the qubits below each mode. Products are expanded
    term by term and merged once at the end.
    """
    acc: dict[tuple, complex] = {}
    for coeff, factors in op.terms:
        for p, _ in factors:
            if not 0 <= p < n_spin_orbitals:
                raise IndexError(f"mode {p} out of range for {n_spin_orbitals} spin orbitals")
        if coeff == 0:
            continue
        partial = {(): complex(coeff)}
        for p, creation in factors:
            nxt: dict[tuple, complex] = {}
            for letters, c in partial.items():
                base = PauliTerm(c, letters)
                for piece in _ladder(p, creation):
                    prod = base * piece
                    nxt[prod.letters] = nxt.get(prod.letters, 0.0) + prod.coefficient
            partial = nxt
        for letters, c in partial.items():
            acc[letters] = acc.get(letters, 0.0) + c
    return PauliSum((PauliTerm(c, k) for k, c in acc.items()), n_spin_orbitals)
