"""Pauli strings, weighted sums of them, and their dense matrices.

Qubit ``q`` of an ``n``-qubit register is bit ``n - 1 - q`` of a basis index,
i.e. qubit 0 is the leftmost tensor factor and the leftmost character of a
bitstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

MERGE_TOL = 1e-12
MAX_DENSE_QUBITS = 14

_I2 = np.eye(2, dtype=complex)
_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (phase, letter) for the single-qubit product a*b
_PRODUCT = {
    ("X", "X"): (1, None), ("Y", "Y"): (1, None), ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


class DenseSizeError(ValueError):
    pass


def _canonical_letters(letters) -> tuple[tuple[int, str], ...]:
    if isinstance(letters, Mapping):
        items = letters.items()
    elif isinstance(letters, str):
        items = parse_letters(letters)
    else:
        items = letters
    out = {}
    for q, l in items:
        l = l.upper()
        q = int(q)
        if l == "I":
            continue
        if l not in _MATS:
            raise ValueError(f"unknown Pauli letter {l!r}")
        if q < 0:
            raise ValueError(f"negative qubit index {q}")
        if q in out:
            raise ValueError(f"qubit {q} appears twice in Pauli string")
        out[q] = l
    return tuple(sorted(out.items()))


def parse_letters(text: str) -> list[tuple[int, str]]:
    """``"X3 Y1 Z0"`` -> ``[(3, "X"), (1, "Y"), (0, "Z")]``."""
    out = []
    for tok in text.split():
        if len(tok) < 2 or tok[0].upper() not in "IXYZ":
            raise ValueError(f"bad Pauli factor {tok!r}")
        out.append((int(tok[1:]), tok[0].upper()))
    return out


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * P`` with ``P`` a tensor product of X/Y/Z on given qubits.

    ``letters`` may be given as a mapping ``{qubit: letter}``, a sequence of
    ``(qubit, letter)`` pairs or a string such as ``"Y0 X1 X2 X3"``; it is
    stored as a tuple of pairs in ascending qubit order without identities.
    """

    coefficient: complex = 1.0
    letters: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _canonical_letters(self.letters))
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def letter(self, q: int) -> str:
        return dict(self.letters).get(q, "I")

    def with_coefficient(self, c: complex) -> "PauliTerm":
        return PauliTerm(c, self.letters)

    def masks(self) -> tuple[int, int]:
        """Symplectic ``(x, z)`` bitmasks; bit ``q`` set for qubit ``q``."""
        x = z = 0
        for q, l in self.letters:
            if l in "XY":
                x |= 1 << q
            if l in "YZ":
                z |= 1 << q
        return x, z

    def commutes_with(self, other: "PauliTerm") -> bool:
        x1, z1 = self.masks()
        x2, z2 = other.masks()
        return (bin(x1 & z2).count("1") + bin(z1 & x2).count("1")) % 2 == 0

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            phase = self.coefficient * other.coefficient
            a, b = dict(self.letters), dict(other.letters)
            out = {}
            for q in sorted(a.keys() | b.keys()):
                la, lb = a.get(q), b.get(q)
                if la is None:
                    out[q] = lb
                elif lb is None:
                    out[q] = la
                else:
                    ph, l = _PRODUCT[(la, lb)]
                    phase *= ph
                    if l is not None:
                        out[q] = l
            return PauliTerm(phase, out)
        return PauliTerm(self.coefficient * other, self.letters)

    def __rmul__(self, scalar):
        return PauliTerm(self.coefficient * scalar, self.letters)

    def __neg__(self):
        return PauliTerm(-self.coefficient, self.letters)

    def label(self) -> str:
        return " ".join(f"{l}{q}" for q, l in self.letters) or "I"

    def __str__(self):
        return f"{_format_coeff(self.coefficient)} {self.label()}"


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:+.17g}"
    return f"({c.real:+.17g}{c.imag:+.17g}j)"


class PauliSum:
    """Weighted sum of Pauli strings on ``n_qubits`` qubits.

    Construction merges terms with identical letters and drops terms whose
    merged coefficient is below ``MERGE_TOL`` in magnitude. Terms are kept in
    canonical (sorted-letter) order, with the identity first.
    """

    __slots__ = ("n_qubits", "terms")

    def __init__(self, terms: Iterable[PauliTerm] = (), n_qubits: int | None = None, tol: float = MERGE_TOL):
        acc: dict[tuple, complex] = {}
        for t in terms:
            acc[t.letters] = acc.get(t.letters, 0.0) + t.coefficient
        merged = [PauliTerm(c, k) for k, c in acc.items() if abs(c) >= tol]
        merged.sort(key=_sort_key)
        width = max((q + 1 for t in merged for q in t.qubits), default=0)
        if n_qubits is None:
            n_qubits = width
        elif width > n_qubits:
            raise ValueError(f"term acts on qubit {width - 1} but n_qubits={n_qubits}")
        self.n_qubits = int(n_qubits)
        self.terms: tuple[PauliTerm, ...] = tuple(merged)

    @classmethod
    def from_label_dict(cls, d: Mapping[str, complex], n_qubits: int | None = None) -> "PauliSum":
        return cls((PauliTerm(c, k) for k, c in d.items()), n_qubits)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, terms={len(self.terms)})"

    def __str__(self):
        return format_pauli_sum(self)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms, max(self.n_qubits, other.n_qubits))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            n = max(self.n_qubits, other.n_qubits)
            return PauliSum((a * b for a in self.terms for b in other.terms), n)
        if isinstance(other, PauliTerm):
            return PauliSum((a * other for a in self.terms), self.n_qubits)
        return PauliSum((t * other for t in self.terms), self.n_qubits)

    def __rmul__(self, scalar):
        return self * scalar

    def identity_coefficient(self) -> complex:
        for t in self.terms:
            if t.is_identity:
                return t.coefficient
        return 0.0

    def non_identity(self) -> list[PauliTerm]:
        return [t for t in self.terms if not t.is_identity]

    def adjoint(self) -> "PauliSum":
        return PauliSum((t.with_coefficient(np.conj(t.coefficient)) for t in self.terms), self.n_qubits)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(t.coefficient.imag) <= tol for t in self.terms)

    def real(self, tol: float = 1e-10) -> "PauliSum":
        """Drop imaginary parts, raising if any exceeds ``tol``."""
        for t in self.terms:
            if abs(t.coefficient.imag) > tol:
                raise ValueError(f"term {t.label()} has complex coefficient {t.coefficient}")
        return PauliSum((t.with_coefficient(t.coefficient.real) for t in self.terms), self.n_qubits)

    def with_n_qubits(self, n: int) -> "PauliSum":
        return PauliSum(self.terms, n)


def _sort_key(t: PauliTerm):
    return (len(t.letters) > 0, tuple((q, "XYZ".index(l)) for q, l in t.letters))


def merge(terms: Iterable[PauliTerm], n_qubits: int | None = None) -> PauliSum:
    return PauliSum(terms, n_qubits)


def pauli_matrix(h, n_qubits: int | None = None) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix by Kronecker expansion of each term.

    ``h`` may be a :class:`PauliSum`, a single :class:`PauliTerm` or an
    unmerged iterable of terms.
    """
    if isinstance(h, PauliTerm):
        terms = [h]
    elif isinstance(h, PauliSum):
        terms = list(h.terms)
        n_qubits = h.n_qubits if n_qubits is None else n_qubits
    else:
        terms = list(h)
    if n_qubits is None:
        n_qubits = max((q + 1 for t in terms for q in t.qubits), default=0)
    if n_qubits > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"{n_qubits} qubits exceeds dense limit of {MAX_DENSE_QUBITS}")
    dim = 2 ** n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        mat = np.ones((1, 1), dtype=complex)
        letters = dict(t.letters)
        for q in range(n_qubits):
            mat = np.kron(mat, _MATS[letters[q]] if q in letters else _I2)
        out += t.coefficient * mat
    return out


def pauli_sparse_matrix(h: PauliSum):
    """CSR matrix of ``h`` built from bit masks; basis index is big-endian in qubit order."""
    from scipy import sparse

    n = h.n_qubits
    dim = 2 ** n
    idx = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for t in h.terms:
        xm = zm = ny = 0
        for q, l in t.letters:
            bit = 1 << (n - 1 - q)
            if l in "XY":
                xm |= bit
            if l in "YZ":
                zm |= bit
            ny += l == "Y"
        parity = np.bitwise_count(idx & zm).astype(np.int64) & 1
        rows.append(idx ^ xm)
        cols.append(idx)
        vals.append(t.coefficient * (1j) ** ny * (1 - 2 * parity))
    if not rows:
        return sparse.csr_matrix((dim, dim), dtype=complex)
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def format_pauli_sum(h: PauliSum) -> str:
    """One term per line: signed coefficient, then letters such as ``X0 Y1``."""
    lines = [f"# n_qubits {h.n_qubits}"]
    for t in h.terms:
        lines.append(f"{_format_coeff(t.coefficient)} {t.label()}" if t.letters else _format_coeff(t.coefficient))
    return "\n".join(lines) + "\n"


def parse_pauli_sum(text: str) -> PauliSum:
    n_qubits = None
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].split()
            if len(tok) == 2 and tok[0] == "n_qubits":
                n_qubits = int(tok[1])
            continue
        head, _, rest = line.partition(" ")
        try:
            coeff = complex(head.strip("()")) if "j" in head else float(head)
            terms.append(PauliTerm(coeff, parse_letters(rest) if rest.strip() not in ("", "I") else ()))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: cannot parse Pauli term {line!r}: {exc}") from None
    return PauliSum(terms, n_qubits)


def expectation_from_counts(term: PauliTerm, counts) -> float:
    """Average parity of the measured bits on ``term``'s qubits.

    ``counts`` maps bitstrings (qubit 0 leftmost) to counts and is assumed to
    come from a circuit already rotated into the term's eigenbasis. The term's
    coefficient is not applied.
    """
    items = list(counts.items())
    shots = sum(c for _, c in items)
    if shots <= 0:
        raise ValueError("empty counts histogram")
    sites = term.qubits
    total = 0
    for bits, c in items:
        parity = sum(bits[q] == "1" for q in sites) % 2
        total += -c if parity else c
    return total / shots


def is_z_type(term: PauliTerm) -> bool:
    return all(l == "Z" for _, l in term.letters)


def identity_sum(c: float, n_qubits: int) -> PauliSum:
    return PauliSum([PauliTerm(c, ())], n_qubits)


def pauli_norm(h: PauliSum) -> float:
    return math.fsum(abs(t.coefficient) for t in h.terms)
