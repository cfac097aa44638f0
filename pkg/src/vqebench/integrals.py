"""Molecular integrals, frozen-core reduction and the second-quantized Hamiltonian.

Spin-orbital convention: for ``n`` spin orbitals, indices ``0 .. n/2 - 1`` are
spin-up and ``n/2 .. n - 1`` are spin-down, with spatial orbital ``p mod n/2``.

Two-electron integrals are stored as ``g2[p, q, r, s] = <p q | s r>`` so the
two-body operator reads ``1/2 sum g2[p, q, r, s] p^ q^ r s`` with no index
shuffling. In chemists' notation this element is ``(p s | q r)``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

SYMMETRY_TOL = 1e-10


class IntegralFormatError(ValueError):
    """Malformed integral file; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class IntegralSymmetryError(ValueError):
    """Integral tensors violate a required permutation or spin symmetry."""

    def __init__(self, message: str, indices: tuple[int, ...]):
        self.indices = indices
        super().__init__(f"{message} at indices {indices}")


class ActiveSpaceError(ValueError):
    pass


def spin_of(p: int, n_spin_orbitals: int) -> int:
    """0 for spin-up, 1 for spin-down."""
    return 0 if p < n_spin_orbitals // 2 else 1


def _chem_view(g2: np.ndarray) -> np.ndarray:
    # chem[p, s, q, r] = (p s | q r) = g2[p, q, r, s]
    return np.einsum("pqrs->psqr", g2)


def _from_chem(chem: np.ndarray) -> np.ndarray:
    return np.einsum("psqr->pqrs", chem)


def g2_symmetry_orbit(p: int, q: int, r: int, s: int) -> list[tuple[int, int, int, int]]:
    """Index tuples of ``g2`` that must equal ``g2[p, q, r, s]`` for real orbitals."""
    # chemists' (i j | k l) with i=p, j=s, k=q, l=r; map each of the 8 permutations back
    i, j, k, l = p, s, q, r
    chem_perms = [
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    ]
    out = []
    for a, b, c, d in chem_perms:
        t = (a, c, d, b)
        if t not in out:
            out.append(t)
    return out


@dataclass(frozen=True, eq=False)
class IntegralSet:
    """Nuclear repulsion plus one- and two-electron integrals over spin orbitals.

    Attributes:
        n_spin_orbitals: number of spin orbitals ``N``.
        n_electrons: electron count the integrals were generated for.
        e_nuclear: constant energy term (Hartree).
        h1: ``(N, N)`` one-electron integrals.
        g2: ``(N, N, N, N)`` array with ``g2[p, q, r, s] = <p q | s r>``.
    """

    n_spin_orbitals: int
    n_electrons: int
    e_nuclear: float
    h1: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.n_spin_orbitals
        h1 = np.array(self.h1, dtype=float)
        g2 = np.array(self.g2, dtype=float)
        if h1.shape != (n, n):
            raise ValueError(f"h1 has shape {h1.shape}, expected {(n, n)}")
        if g2.shape != (n,) * 4:
            raise ValueError(f"g2 has shape {g2.shape}, expected {(n,) * 4}")
        if not 0 <= self.n_electrons <= n:
            raise ValueError(f"n_electrons={self.n_electrons} outside [0, {n}]")
        h1.setflags(write=False)
        g2.setflags(write=False)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "g2", g2)
        object.__setattr__(self, "e_nuclear", float(self.e_nuclear))
        self.validate()

    def validate(self, tol: float = SYMMETRY_TOL) -> None:
        """Raise :class:`IntegralSymmetryError` naming the first bad element."""
        h1, g2, n = self.h1, self.g2, self.n_spin_orbitals
        bad = np.argwhere(np.abs(h1 - h1.T) > tol)
        if len(bad):
            p, q = map(int, bad[0])
            raise IntegralSymmetryError("h1 is not symmetric", (p, q))
        chem = _chem_view(g2)
        for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
            bad = np.argwhere(np.abs(chem - chem.transpose(perm)) > tol)
            if len(bad):
                i, j, k, l = map(int, bad[0])
                raise IntegralSymmetryError(
                    "g2 lacks 8-fold permutation symmetry", (i, k, l, j)
                )
        spin = np.array([spin_of(p, n) for p in range(n)])
        mixed = spin[:, None] != spin[None, :]
        bad = np.argwhere(mixed & (np.abs(h1) > tol))
        if len(bad):
            raise IntegralSymmetryError("spin-forbidden h1 element", tuple(map(int, bad[0])))
        forbidden = mixed[:, None, None, :] | mixed[None, :, :, None]
        bad = np.argwhere(forbidden & (np.abs(g2) > tol))
        if len(bad):
            raise IntegralSymmetryError("spin-forbidden g2 element", tuple(map(int, bad[0])))

    @property
    def n_spatial(self) -> int:
        return self.n_spin_orbitals // 2


@dataclass(frozen=True)
class ActiveSpaceSpec:
    frozen: tuple[int, ...]
    active: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "frozen", tuple(int(i) for i in self.frozen))
        object.__setattr__(self, "active", tuple(int(i) for i in self.active))

    def validate(self, n_spin_orbitals: int) -> None:
        both = sorted(set(self.frozen) & set(self.active))
        if both:
            raise ActiveSpaceError(f"spin orbital {both[0]} is both frozen and active")
        for name, idx in (("frozen", self.frozen), ("active", self.active)):
            if len(set(idx)) != len(idx):
                raise ActiveSpaceError(f"duplicate index in {name} list {list(idx)}")
            for i in idx:
                if not 0 <= i < n_spin_orbitals:
                    raise ActiveSpaceError(
                        f"{name} index {i} out of range for {n_spin_orbitals} spin orbitals"
                    )
        for name, idx in (("frozen", self.frozen), ("active", self.active)):
            up = sum(spin_of(i, n_spin_orbitals) == 0 for i in idx)
            if 2 * up != len(idx):
                raise ActiveSpaceError(
                    f"{name} set is spin-imbalanced: {up} up vs {len(idx) - up} down"
                )

    def active_order(self, n_spin_orbitals: int) -> list[int]:
        """Full-space indices in reduced order: active spin-up (sorted) then spin-down."""
        up = sorted(i for i in self.active if spin_of(i, n_spin_orbitals) == 0)
        down = sorted(i for i in self.active if spin_of(i, n_spin_orbitals) == 1)
        return up + down


Factor = tuple[int, bool]  # (spin-orbital index, is_creation)


@dataclass(frozen=True)
class FermionOp:
    """Linear combination of products of creation/annihilation operators.

    Each term is ``(coefficient, factors)`` with ``factors`` applied left to
    right as written, e.g. ``((0, True), (1, False))`` is ``a^_0 a_1``.
    """

    terms: tuple[tuple[complex, tuple[Factor, ...]], ...] = ()

    def __post_init__(self):
        clean = []
        for coeff, factors in self.terms:
            factors = tuple((int(i), bool(c)) for i, c in factors)
            clean.append((coeff, factors))
        object.__setattr__(self, "terms", tuple(clean))

    @classmethod
    def term(cls, coeff: complex, *factors: Factor) -> "FermionOp":
        return cls(((coeff, tuple(factors)),))

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "FermionOp":
        return cls(((coeff, ()),))

    def __add__(self, other: "FermionOp") -> "FermionOp":
        return FermionOp(self.terms + other.terms)

    def __sub__(self, other: "FermionOp") -> "FermionOp":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "FermionOp":
        return FermionOp(tuple((c * scalar, f) for c, f in self.terms))

    __rmul__ = __mul__

    def __matmul__(self, other: "FermionOp") -> "FermionOp":
        return FermionOp(
            tuple((c1 * c2, f1 + f2) for c1, f1 in self.terms for c2, f2 in other.terms)
        )

    def adjoint(self) -> "FermionOp":
        return FermionOp(
            tuple(
                (np.conj(c), tuple((i, not cr) for i, cr in reversed(f)))
                for c, f in self.terms
            )
        )

    def max_index(self) -> int:
        return max((i for _, f in self.terms for i, _ in f), default=-1)

    def pruned(self) -> "FermionOp":
        """Drop zero terms and terms that vanish because a factor repeats back to back."""
        keep = []
        for c, f in self.terms:
            if c == 0:
                continue
            if any(f[k] == f[k + 1] for k in range(len(f) - 1)):
                continue
            keep.append((c, f))
        return FermionOp(tuple(keep))


def antisymmetrize(g2: np.ndarray, p: int, q: int, r: int, s: int) -> float:
    """Return the antisymmetrized integral ``<p q | s r> - <p q | r s>``."""
    n = g2.shape[0]
    for i in (p, q, r, s):
        if not 0 <= i < n:
            raise IndexError(f"spin-orbital index {i} out of range [0, {n})")
    return float(g2[p, q, r, s] - g2[p, q, s, r])


def antisymmetrized_tensor(g2: np.ndarray) -> np.ndarray:
    """Vectorized :func:`antisymmetrize` over all index tuples."""
    return g2 - g2.transpose(0, 1, 3, 2)


# Half-weighted core potential in the effective one-body term (the literal
# variant) and the full weight, which reproduces the frozen-sector spectrum.
HALF_CORE_FACTOR = 0.5
EXACT_CORE_FACTOR = 1.0


def freeze_core(
    full: IntegralSet,
    spec: ActiveSpaceSpec,
    core_factor: float = HALF_CORE_FACTOR,
) -> IntegralSet:
    """Fold doubly occupied core spin orbitals into constant and one-body terms.

    Args:
        full: integrals over all spin orbitals.
        spec: frozen and active spin-orbital lists.
        core_factor: prefactor of the core mean-field potential added to the
            one-body integrals. The default ``0.5`` keeps the half-weighted
            variant for comparison; pass ``1.0`` (:data:`EXACT_CORE_FACTOR`)
            to reproduce the full Hamiltonian restricted to the
            frozen-occupied sector. The benchmark runner uses ``1.0``.

    Returns:
        IntegralSet over the active orbitals only, relabeled densely with
        spin-up orbitals first.
    """
    n = full.n_spin_orbitals
    spec.validate(n)
    frozen = list(spec.frozen)
    order = spec.active_order(n)
    gbar = antisymmetrized_tensor(full.g2)

    e0 = full.e_nuclear
    for a in frozen:
        e0 += full.h1[a, a]
        e0 += 0.5 * sum(gbar[a, b, b, a] for b in frozen)

    h_eff = full.h1.copy()
    for a in frozen:
        h_eff += core_factor * gbar[a, :, :, a]

    idx = np.array(order, dtype=int)
    h_red = h_eff[np.ix_(idx, idx)]
    g_red = full.g2[np.ix_(idx, idx, idx, idx)]
    n_el = full.n_electrons - len(frozen)
    if n_el < 0 or n_el > len(order):
        raise ActiveSpaceError(
            f"{n_el} active electrons do not fit in {len(order)} active spin orbitals"
        )
    return IntegralSet(len(order), n_el, e0, h_red, g_red)


def build_fermion_hamiltonian(ints: IntegralSet, tol: float = 0.0) -> FermionOp:
    """``H0 + sum h[p,q] p^ q + 1/2 sum g2[p,q,r,s] p^ q^ r s`` as a FermionOp."""
    n = ints.n_spin_orbitals
    terms: list = [(ints.e_nuclear, ())]
    for p, q in itertools.product(range(n), repeat=2):
        v = ints.h1[p, q]
        if abs(v) > tol:
            terms.append((float(v), ((p, True), (q, False))))
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p == q or r == s:
            continue
        v = ints.g2[p, q, r, s]
        if abs(v) > tol:
            terms.append((0.5 * float(v), ((p, True), (q, True), (r, False), (s, False))))
    return FermionOp(tuple(terms))


def spatial_to_spin(
    h_spatial: np.ndarray,
    eri_chem: np.ndarray,
    e_nuclear: float,
    n_electrons: int,
) -> IntegralSet:
    """Expand spatial-orbital integrals (chemists' ``(ij|kl)``) to spin orbitals."""
    m = h_spatial.shape[0]
    n = 2 * m
    h1 = np.zeros((n, n))
    h1[:m, :m] = h_spatial
    h1[m:, m:] = h_spatial
    chem = np.zeros((n,) * 4)
    for s1, s2 in itertools.product((0, 1), repeat=2):
        a, b = slice(s1 * m, (s1 + 1) * m), slice(s2 * m, (s2 + 1) * m)
        chem[a, a, b, b] = eri_chem
    return IntegralSet(n, n_electrons, e_nuclear, h1, _from_chem(chem))


# ---------------------------------------------------------------------------
# file formats

_HEADER_KEYS = {"n_spin_orbitals", "n_electrons", "e_nuclear"}


def _assign(store: dict, key: tuple, value: float, orbit: Iterable[tuple], lineno: int, kind: str):
    for k in orbit:
        prev = store.get(k)
        if prev is not None and abs(prev[0] - value) > SYMMETRY_TOL:
            raise IntegralSymmetryError(
                f"{kind}{list(key)} = {value!r} (line {lineno}) conflicts with "
                f"{kind}{list(k)} = {prev[0]!r} (line {prev[1]})",
                key,
            )
    for k in orbit:
        store.setdefault(k, (value, lineno))


def parse_integrals(text: str, path=None) -> IntegralSet:
    """Parse the line-oriented integral text format.

    Entries absent from the file are filled from their symmetry partners, so
    either every element or one representative per symmetry orbit may be
    listed. Listed elements that contradict each other raise
    :class:`IntegralSymmetryError`.
    """
    header: dict[str, float] = {}
    h_store: dict = {}
    g_store: dict = {}
    pending: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        tag = tok[0].lower()
        try:
            if tag in _HEADER_KEYS:
                if len(tok) != 2:
                    raise IntegralFormatError(f"expected '{tag} <value>'", lineno, path)
                header[tag] = float(tok[1])
            elif tag == "h":
                if len(tok) != 4:
                    raise IntegralFormatError("expected 'h p q value'", lineno, path)
                pending.append(("h", tuple(int(t) for t in tok[1:3]), float(tok[3]), lineno))
            elif tag == "g":
                if len(tok) != 6:
                    raise IntegralFormatError("expected 'g p q r s value'", lineno, path)
                pending.append(("g", tuple(int(t) for t in tok[1:5]), float(tok[5]), lineno))
            else:
                raise IntegralFormatError(f"unknown record tag {tok[0]!r}", lineno, path)
        except ValueError as exc:
            if isinstance(exc, IntegralFormatError):
                raise
            raise IntegralFormatError(f"bad number in {line!r}: {exc}", lineno, path) from None

    missing = _HEADER_KEYS - header.keys()
    if missing:
        raise IntegralFormatError(f"missing header field(s): {sorted(missing)}", None, path)
    n = int(header["n_spin_orbitals"])
    if n != header["n_spin_orbitals"] or n < 1:
        raise IntegralFormatError("n_spin_orbitals must be a positive integer", None, path)

    for kind, idx, value, lineno in pending:
        if any(not 0 <= i < n for i in idx):
            raise IntegralFormatError(f"index out of range in {kind} {idx}", lineno, path)
        if kind == "h":
            p, q = idx
            _assign(h_store, idx, value, [(p, q), (q, p)], lineno, "h1")
        else:
            _assign(g_store, idx, value, g2_symmetry_orbit(*idx), lineno, "g2")

    h1 = np.zeros((n, n))
    for k, (v, _) in h_store.items():
        h1[k] = v
    g2 = np.zeros((n,) * 4)
    for k, (v, _) in g_store.items():
        g2[k] = v
    return IntegralSet(n, int(header["n_electrons"]), header["e_nuclear"], h1, g2)


def load_integrals(path) -> IntegralSet:
    """Read an integral file; FCIDUMP files are detected by their ``&FCI`` header."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().upper().startswith("&FCI"):
        return parse_fcidump(text, path)
    return parse_integrals(text, path)


def format_integrals(ints: IntegralSet, comment: str | None = None, unique: bool = True, tol: float = 1e-14) -> str:
    """Serialize to the text format; ``unique`` writes one element per symmetry orbit."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"n_spin_orbitals {ints.n_spin_orbitals}")
    lines.append(f"n_electrons {ints.n_electrons}")
    lines.append(f"e_nuclear {ints.e_nuclear!r}")
    n = ints.n_spin_orbitals
    for p in range(n):
        for q in range(p if unique else 0, n):
            v = ints.h1[p, q]
            if abs(v) > tol:
                lines.append(f"h {p} {q} {float(v)!r}")
    seen = set()
    for idx in itertools.product(range(n), repeat=4):
        v = ints.g2[idx]
        if abs(v) <= tol:
            continue
        if unique:
            if idx in seen:
                continue
            seen.update(g2_symmetry_orbit(*idx))
        lines.append("g {} {} {} {} {!r}".format(*idx, float(v)))
    return "\n".join(lines) + "\n"


def write_integrals(ints: IntegralSet, path, comment: str | None = None) -> None:
    Path(path).write_text(format_integrals(ints, comment), encoding="utf-8")


_FCI_KEY = re.compile(r"(\w+)\s*=\s*([^,=]+?)\s*(?:,|$)")


def parse_fcidump(text: str, path=None) -> IntegralSet:
    """Read a spin-restricted FCIDUMP (spatial orbitals, chemists' notation, 1-based)."""
    head, _, body = _split_fcidump(text)
    fields = {k.upper(): v for k, v in _FCI_KEY.findall(head.replace("\n", ","))}
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
    except (KeyError, ValueError):
        raise IntegralFormatError("FCIDUMP header lacks NORB/NELEC", 1, path) from None
    if int(fields.get("UHF", "0").strip() or 0):
        raise IntegralFormatError("UHF FCIDUMP files are not supported", 1, path)
    h = np.zeros((norb, norb))
    eri = np.zeros((norb,) * 4)
    ecore = 0.0
    offset = head.count("\n") + 2
    for k, raw in enumerate(body.splitlines()):
        line = raw.strip()
        if not line:
            continue
        tok = line.split()
        try:
            v = float(tok[0].replace("D", "E").replace("d", "e"))
            i, j, a, b = (int(t) for t in tok[1:5])
        except (ValueError, IndexError):
            raise IntegralFormatError(f"bad FCIDUMP record {line!r}", offset + k, path) from None
        if i == j == a == b == 0:
            ecore = v
        elif a == b == 0:
            h[i - 1, j - 1] = h[j - 1, i - 1] = v
        else:
            i, j, a, b = i - 1, j - 1, a - 1, b - 1
            for t in [(i, j, a, b), (j, i, a, b), (i, j, b, a), (j, i, b, a),
                      (a, b, i, j), (b, a, i, j), (a, b, j, i), (b, a, j, i)]:
                eri[t] = v
    return spatial_to_spin(h, eri, ecore, nelec)


def _split_fcidump(text: str):
    m = re.search(r"(&END|/)\s*$", text, flags=re.IGNORECASE | re.MULTILINE)
    if m is None:
        raise IntegralFormatError("FCIDUMP namelist terminator (&END or /) not found", 1)
    return text[: m.start()], m.group(1), text[m.end():].lstrip("\n")


__all__ = [
    "ActiveSpaceError",
    "ActiveSpaceSpec",
    "EXACT_CORE_FACTOR",
    "FermionOp",
    "IntegralFormatError",
    "IntegralSet",
    "IntegralSymmetryError",
    "HALF_CORE_FACTOR",
    "antisymmetrize",
    "antisymmetrized_tensor",
    "build_fermion_hamiltonian",
    "format_integrals",
    "freeze_core",
    "load_integrals",
    "parse_fcidump",
    "parse_integrals",
    "spatial_to_spin",
    "write_integrals",
]
