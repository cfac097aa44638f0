"""Two-body reduced density matrices over active spin orbitals.

``rho[p, q, r, s] = <a^_p a^_q a_s a_r>``. The pair matrix groups the index
pairs as rows ``(p, q)`` and columns ``(r, s)``, so tensor products contract
``C[p,q,u,v] = A[p,q,r,s] B[r,s,u,v]`` and the matrix is Hermitian. Its trace
over ordered pairs is ``M (M - 1)`` for ``M`` electrons.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .integrals import FermionOp, IntegralSet
from .pauli import PauliSum, PauliTerm, jordan_wigner


@dataclass(frozen=True, eq=False)
class RDM2:
    tensor: np.ndarray = field(repr=False)
    n_electrons: int = 2
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        t = np.array(self.tensor, dtype=complex)
        if t.ndim != 4 or len(set(t.shape)) != 1:
            raise ValueError(f"RDM2 tensor must be (n, n, n, n), got {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)

    @property
    def n_orbitals(self) -> int:
        return self.tensor.shape[0]

    def pair_matrix(self) -> np.ndarray:
        n = self.n_orbitals
        return self.tensor.reshape(n * n, n * n)

    @classmethod
    def from_pair_matrix(cls, d: np.ndarray, n_electrons: int) -> "RDM2":
        n = int(round(np.sqrt(d.shape[0])))
        return cls(np.asarray(d).reshape(n, n, n, n), n_electrons)

    def trace(self) -> complex:
        return complex(np.trace(self.pair_matrix()))

    def invariant_violation(self) -> float:
        """Largest deviation from antisymmetry and Hermiticity."""
        t = self.tensor
        return float(max(
            np.abs(t + t.transpose(1, 0, 2, 3)).max(),
            np.abs(t + t.transpose(0, 1, 3, 2)).max(),
            np.abs(t - t.transpose(2, 3, 0, 1).conj()).max(),
        ))

    def to_dict(self) -> dict:
        return {
            "n_orbitals": self.n_orbitals,
            "n_electrons": self.n_electrons,
            "real": np.real(self.tensor).tolist(),
            "imag": np.imag(self.tensor).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RDM2":
        return cls(np.array(d["real"]) + 1j * np.array(d["imag"]), d["n_electrons"])

    @classmethod
    def from_plan(cls, plan, means: dict, n: int, n_electrons: int) -> "RDM2":
        t = np.zeros((n,) * 4, dtype=complex)

        def ev(op: PauliSum | None) -> float:
            if op is None:
                return 0.0
            return float(sum(np.real(term.coefficient) * means[term.letters] if term.letters
                             else np.real(term.coefficient) for term in op.terms))

        for (p, q, r, s), herm, anti in plan:
            v = 0.5 * (ev(herm) - 1j * ev(anti))
            if (p, q) == (r, s):
                v = v.real
            _fill(t, p, q, r, s, v)
        return cls(t, n_electrons)


def _fill(t: np.ndarray, p: int, q: int, r: int, s: int, v: complex) -> None:
    for (a, b, sa), (c, d, sb) in itertools.product(((p, q, 1), (q, p, -1)), ((r, s, 1), (s, r, -1))):
        t[a, b, c, d] = sa * sb * v
        t[c, d, a, b] = sa * sb * np.conj(v)


def two_body_operator(p: int, q: int, r: int, s: int) -> FermionOp:
    """``a^_p a^_q a_s a_r``."""
    return FermionOp.term(1.0, (p, True), (q, True), (s, False), (r, False))


@lru_cache(maxsize=8)
def rdm2_measurement_plan(n: int):
    """Independent elements with the qubit images of their Hermitian parts.

    Returns ``(plan, strings)``: ``plan`` holds ``((p, q, r, s), E + E^dag,
    i (E - E^dag) or None)`` for ``p < q``, ``r < s`` and pair ``(p, q) <=
    (r, s)``; ``strings`` lists each distinct Pauli string once.
    """
    pairs = [(p, q) for p in range(n) for q in range(p + 1, n)]
    plan = []
    seen: dict[tuple, PauliTerm] = {}
    for i, (p, q) in enumerate(pairs):
        for r, s in pairs[i:]:
            e = two_body_operator(p, q, r, s)
            herm = jordan_wigner(e + e.adjoint(), n).real()
            anti = None
            if (p, q) != (r, s):
                anti = jordan_wigner((e - e.adjoint()) * 1j, n).real()
            for op in (herm, anti):
                if op is None:
                    continue
                for term in op.terms:
                    if term.letters:
                        seen.setdefault(term.letters, PauliTerm(1.0, term.letters))
            plan.append(((p, q, r, s), herm, anti))
    strings = [seen[k] for k in sorted(seen, key=lambda k: tuple((q, "XYZ".index(l)) for q, l in k))]
    return tuple(plan), tuple(strings)


def rdm1_from_rdm2(rdm: RDM2) -> np.ndarray:
    """``rho1[p, q] = sum_r rho[p, r, q, r] / (M - 1)``."""
    m = rdm.n_electrons
    if m < 2:
        raise ValueError("one-body RDM from the 2-RDM needs at least two electrons")
    return np.einsum("prqr->pq", rdm.tensor) / (m - 1)


def energy_from_rdm(ints: IntegralSet, rdm: RDM2) -> float:
    """``E0 + sum h[p,q] rho1[p,q] + 1/2 sum <pq|rs> rho[p,q,r,s]``."""
    n = ints.n_spin_orbitals
    if rdm.n_orbitals != n:
        raise ValueError(f"RDM covers {rdm.n_orbitals} orbitals, integrals cover {n}")
    rho1 = rdm1_from_rdm2(rdm)
    one = np.einsum("pq,pq->", ints.h1, rho1)
    # <p q | r s> = g2[p, q, s, r]
    two = 0.5 * np.einsum("pqsr,pqrs->", ints.g2, rdm.tensor)
    return float(np.real(ints.e_nuclear + one + two))
