"""Qubit tapering with Z2 Pauli symmetries.

Symmetries are found as the GF(2) kernel of the Hamiltonian's symplectic
check matrix. Each independent generator ``tau_i`` is paired with a
single-qubit Pauli ``sigma_i`` that anticommutes with it and commutes with
every other generator; the Clifford ``(sigma_i + tau_i)/sqrt(2)`` exchanges
the two, after which ``sigma_i`` is replaced by the chosen eigenvalue and its
qubit is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import PauliSum, PauliTerm, is_z_type


class TaperingSectorError(ValueError):
    """The reference state does not fix a generator's eigenvalue."""


@dataclass(frozen=True)
class TaperingResult:
    reduced: PauliSum
    symmetry_generators: tuple[PauliTerm, ...]
    sector: tuple[int, ...]
    removed_qubits: tuple[int, ...] = ()
    partners: tuple[PauliTerm, ...] = field(default=(), repr=False)
    found: bool = True

    @property
    def n_removed(self) -> int:
        return len(self.removed_qubits)


def gf2_rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    a = (np.array(m, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def gf2_null_space(m: np.ndarray) -> np.ndarray:
    """Basis (as rows) of ``{v : m v = 0 mod 2}``."""
    m = np.atleast_2d(np.array(m, dtype=np.uint8))
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=np.uint8)
    rref, pivots = gf2_rref(m)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for row, p in zip(rref, pivots):
            if row[f]:
                v[p] = 1
        basis.append(v)
    return np.array(basis, dtype=np.uint8).reshape(len(basis), cols)


def _term_from_xz(x: np.ndarray, z: np.ndarray) -> PauliTerm:
    letters = {}
    for q, (xb, zb) in enumerate(zip(x, z)):
        if xb and zb:
            letters[q] = "Y"
        elif xb:
            letters[q] = "X"
        elif zb:
            letters[q] = "Z"
    return PauliTerm(1.0, letters)


def symmetry_generators(h: PauliSum) -> list[PauliTerm]:
    """Independent, mutually commuting Pauli strings commuting with every term.

    Z-type generators are listed first, in reduced row echelon form, so each
    owns a pivot qubit that no other Z-type generator touches.
    """
    n = h.n_qubits
    terms = h.non_identity()
    check = np.zeros((len(terms), 2 * n), dtype=np.uint8)
    for i, t in enumerate(terms):
        for q, l in t.letters:
            # row is [z | x] so that row . [vx | vz] is the symplectic product
            if l in "YZ":
                check[i, q] = 1
            if l in "XY":
                check[i, n + q] = 1
    kernel = gf2_null_space(check) if len(terms) else np.eye(2 * n, dtype=np.uint8)
    if len(kernel) == 0:
        return []
    # order columns x-part first so rows with an empty x-part (Z-type) sink to the bottom
    basis, _ = gf2_rref(kernel)
    z_rows = [row for row in basis if not row[:n].any()]
    other_rows = [row for row in basis if row[:n].any()]

    gens: list[PauliTerm] = []
    if z_rows:
        zmat, _ = gf2_rref(np.array([r[n:] for r in z_rows]))
        for zr in zmat:
            gens.append(_term_from_xz(np.zeros(n, dtype=np.uint8), zr))
    for row in other_rows:
        cand = _term_from_xz(row[:n], row[n:])
        if all(cand.commutes_with(g) for g in gens):
            gens.append(cand)
    return gens


def _pick_partners(gens: Sequence[PauliTerm], n: int) -> tuple[list[PauliTerm], list[PauliTerm]]:
    used: set[int] = set()
    kept, partners = [], []
    for i, g in enumerate(gens):
        others = [o for j, o in enumerate(gens) if j != i]
        choice = None
        # Z-type generators prefer X on their lowest exclusive Z qubit
        letters = ("X", "Y", "Z") if is_z_type(g) else ("Z", "X", "Y")
        for q in range(n):
            if q in used:
                continue
            for l in letters:
                s = PauliTerm(1.0, {q: l})
                if s.commutes_with(g):
                    continue
                if all(s.commutes_with(o) for o in others):
                    choice = s
                    break
            if choice is not None:
                break
        if choice is not None:
            used.add(choice.qubits[0])
            kept.append(g)
            partners.append(choice)
    return kept, partners


def _as_bits(hint, n: int) -> list[int]:
    if isinstance(hint, str):
        bits = [int(c) for c in hint]
    else:
        bits = [int(b) for b in hint]
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"occupation hint must be {n} bits, got {hint!r}")
    return bits


def reference_eigenvalue(gen: PauliTerm, bits: Sequence[int]) -> int:
    if not is_z_type(gen):
        raise TaperingSectorError(
            f"generator {gen.label()} is not diagonal in the computational basis; "
            "pass an explicit sector"
        )
    return -1 if sum(bits[q] for q in gen.qubits) % 2 else 1


def _clifford(partner: PauliTerm, gen: PauliTerm, n: int) -> PauliSum:
    r = 1 / np.sqrt(2)
    return PauliSum([partner * r, gen * r], n)


def taper_z2(
    h: PauliSum,
    occupation_hint=None,
    sector: Sequence[int] | None = None,
) -> TaperingResult:
    """Remove one qubit per independent Z2 symmetry of ``h``.

    With only ``occupation_hint`` the Z-type generators are used, since the
    reference bitstring fixes their eigenvalues. Passing ``sector`` (one
    ``+1/-1`` per generator of :func:`symmetry_generators`, after partner
    selection) tapers with every generator, including non-diagonal ones.

    Args:
        h: Hermitian qubit operator.
        occupation_hint: reference bitstring (qubit 0 first), typically the
            Hartree-Fock occupation.
        sector: explicit eigenvalues; overrides the hint.

    Returns:
        TaperingResult; ``found`` is False and ``reduced`` is ``h`` itself when
        no usable symmetry exists.
    """
    if not h.is_hermitian():
        raise ValueError("taper_z2 needs a Hermitian operator")
    n = h.n_qubits
    candidates = symmetry_generators(h)
    if sector is None:
        if occupation_hint is None:
            raise TaperingSectorError(
                "symmetry sector is ambiguous: pass occupation_hint or an explicit sector"
            )
        candidates = [g for g in candidates if is_z_type(g)]
    gens, partners = _pick_partners(candidates, n)
    if not gens:
        return TaperingResult(h, (), (), (), (), found=False)

    if sector is None:
        bits = _as_bits(occupation_hint, n)
        sector = [reference_eigenvalue(g, bits) for g in gens]
    sector = tuple(int(s) for s in sector)
    if len(sector) != len(gens) or any(s not in (1, -1) for s in sector):
        raise TaperingSectorError(f"sector must hold {len(gens)} values of +/-1, got {sector}")

    current = list(h.terms)
    for g, s in zip(gens, partners):
        u = _clifford(s, g, n)
        current = list((u * PauliSum(current, n) * u).terms)

    removed = {p.qubits[0]: (p.letter(p.qubits[0]), ev) for p, ev in zip(partners, sector)}
    keep = [q for q in range(n) if q not in removed]
    relabel = {q: k for k, q in enumerate(keep)}
    out = []
    for t in current:
        coeff = t.coefficient
        letters = {}
        for q, l in t.letters:
            if q in removed:
                letter, ev = removed[q]
                if l != letter:
                    raise RuntimeError(f"tapering failed: {t.label()} has {l} on removed qubit {q}")
                coeff *= ev
            else:
                letters[relabel[q]] = l
        out.append(PauliTerm(coeff, letters))
    reduced = PauliSum(out, len(keep)).real()
    return TaperingResult(
        reduced,
        tuple(gens),
        sector,
        tuple(sorted(removed)),
        tuple(partners),
        found=True,
    )


def sector_projector(generators: Sequence[PauliTerm], sector: Sequence[int], n: int) -> PauliSum:
    """``prod_i (1 + s_i tau_i)/2`` as a PauliSum."""
    proj = PauliSum([PauliTerm(1.0, ())], n)
    for g, s in zip(generators, sector):
        proj = proj * PauliSum([PauliTerm(0.5, ()), g * (0.5 * s)], n)
    return proj
