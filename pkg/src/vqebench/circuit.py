"""Gate-list circuits and the trial-state builders.

Rotation conventions: ``RX(a) = exp(-i a X / 2)`` and likewise for RY, RZ.
A rotation gate either holds a numeric angle or references a named parameter
with a fixed multiplier, so ``exp(i theta P)`` compiles to an ``RZ`` whose
angle is ``-2 * theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .integrals import FermionOp
from .pauli import PauliSum, PauliTerm, jordan_wigner

ROTATIONS = ("RX", "RY", "RZ")
GATE_KINDS = ("X", "H", "CNOT") + ROTATIONS


class UnboundParameterError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    param: str | None = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} acts on {want} qubit(s), got {self.qubits}")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"CNOT control and target coincide: {self.qubits}")
        if self.kind in ROTATIONS:
            if (self.angle is None) == (self.param is None):
                raise ValueError(f"{self.kind} needs exactly one of angle or param")
        elif self.angle is not None or self.param is not None:
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def is_bound(self) -> bool:
        return self.param is None

    def bound_angle(self, values: Mapping[str, float] | None = None) -> float | None:
        if self.kind not in ROTATIONS:
            return None
        if self.param is None:
            return self.angle
        if values is None or self.param not in values:
            raise UnboundParameterError(f"parameter {self.param!r} is not bound")
        return self.scale * float(values[self.param])

    def dumps(self) -> str:
        q = " ".join(str(i) for i in self.qubits)
        if self.kind not in ROTATIONS:
            return f"{self.kind} {q}"
        if self.param is None:
            return f"{self.kind} {q} {self.angle!r}"
        return f"{self.kind} {q} {self.param}*{self.scale!r}"


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    parameters: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        used = []
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g.dumps()!r} addresses qubit outside 0..{self.n_qubits - 1}")
            if g.param is not None and g.param not in used:
                used.append(g.param)
        params = tuple(self.parameters) if self.parameters else tuple(used)
        missing = [p for p in used if p not in params]
        if missing:
            raise ValueError(f"gates reference undeclared parameters {missing}")
        object.__setattr__(self, "parameters", params)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot compose circuits of different width")
        params = self.parameters + tuple(p for p in other.parameters if p not in self.parameters)
        return Circuit(self.n_qubits, self.gates + other.gates, params)

    def __len__(self):
        return len(self.gates)

    @property
    def n_parameters(self) -> int:
        return len(self.parameters)

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def is_bound(self) -> bool:
        return all(g.is_bound for g in self.gates)

    def bind(self, values: Mapping[str, float] | Sequence[float]) -> "Circuit":
        """Substitute numeric angles for every named parameter."""
        if not isinstance(values, Mapping):
            values = list(values)
            if len(values) != len(self.parameters):
                raise ValueError(f"expected {len(self.parameters)} values, got {len(values)}")
            values = dict(zip(self.parameters, values))
        gates = []
        for g in self.gates:
            if g.param is None:
                gates.append(g)
            else:
                gates.append(Gate(g.kind, g.qubits, angle=g.bound_angle(values)))
        return Circuit(self.n_qubits, tuple(gates), ())

    def dumps(self) -> str:
        head = f"# qubits {self.n_qubits}"
        if self.parameters:
            head += "\n# parameters " + " ".join(self.parameters)
        return "\n".join([head] + [g.dumps() for g in self.gates]) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Circuit":
        n = None
        params: tuple[str, ...] = ()
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                tok = line[1:].split()
                if tok and tok[0] == "qubits":
                    n = int(tok[1])
                elif tok and tok[0] == "parameters":
                    params = tuple(tok[1:])
                continue
            tok = line.split()
            kind = tok[0]
            try:
                if kind in ROTATIONS:
                    arg = tok[2]
                    if "*" in arg:
                        name, scale = arg.split("*", 1)
                        gates.append(Gate(kind, (int(tok[1]),), param=name, scale=float(scale)))
                    else:
                        gates.append(Gate(kind, (int(tok[1]),), angle=float(arg)))
                else:
                    gates.append(Gate(kind, tuple(int(t) for t in tok[1:])))
            except (IndexError, ValueError) as exc:
                raise ValueError(f"line {lineno}: bad gate {line!r}: {exc}") from None
        if n is None:
            raise ValueError("circuit dump lacks '# qubits N' header")
        return cls(n, tuple(gates), params)


def _rot(kind: str, q: int, theta, scale: float = 1.0) -> Gate:
    if isinstance(theta, str):
        return Gate(kind, (q,), param=theta, scale=scale)
    return Gate(kind, (q,), angle=scale * float(theta))


def pauli_exponential_gates(term: PauliTerm, theta) -> list[Gate]:
    """Gates for ``exp(i * theta * c * P)`` where ``term = c * P`` has real ``c``.

    X factors are rotated with H and Y factors with ``RX(pi/2)``; the parity
    of the support is collected on its highest qubit by a CNOT ladder.
    """
    if abs(term.coefficient.imag) > 1e-12:
        raise ValueError(f"term {term.label()} must have a real coefficient")
    c = term.coefficient.real
    if term.is_identity or c == 0:
        return []
    qubits = term.qubits
    pre, post = [], []
    for q, l in term.letters:
        if l == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif l == "Y":
            pre.append(Gate("RX", (q,), angle=math.pi / 2))
            post.append(Gate("RX", (q,), angle=-math.pi / 2))
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(qubits[:-1], qubits[1:])]
    rz = _rot("RZ", qubits[-1], theta, -2.0 * c)
    return pre + ladder + [rz] + ladder[::-1] + post


def hartree_fock_occupation(n_qubits: int, n_electrons: int) -> list[int]:
    """Occupied qubits: the lowest orbitals of the spin-up then spin-down block."""
    if not 0 <= n_electrons <= n_qubits:
        raise ValueError(f"{n_electrons} electrons do not fit in {n_qubits} qubits")
    if n_electrons == 0:
        return []
    if n_qubits % 2:
        raise ValueError("the spin-block convention needs an even number of qubits")
    half = n_qubits // 2
    n_up = (n_electrons + 1) // 2
    n_down = n_electrons - n_up
    return list(range(n_up)) + list(range(half, half + n_down))


def hartree_fock_bits(n_qubits: int, n_electrons: int) -> str:
    occ = set(hartree_fock_occupation(n_qubits, n_electrons))
    return "".join("1" if q in occ else "0" for q in range(n_qubits))


def hartree_fock_reference(n_qubits: int, n_electrons: int) -> Circuit:
    return Circuit(n_qubits, tuple(Gate("X", (q,)) for q in hartree_fock_occupation(n_qubits, n_electrons)))


UCC1_GENERATOR = PauliTerm(1.0, "Y0 X1 X2 X3")


def build_ucc1(theta: float | str | None = None) -> Circuit:
    """``exp(i theta Y0 X1 X2 X3)`` on four qubits; symbolic ``theta`` when None."""
    t = "theta" if theta is None else theta
    return Circuit(4, tuple(pauli_exponential_gates(UCC1_GENERATOR, t)))


def single_excitation_generator(p: int, q: int, n_qubits: int) -> PauliSum:
    """Hermitian ``G`` with ``a^_q a_p - a^_p a_q = i G`` under Jordan-Wigner."""
    anti = FermionOp.term(1.0, (q, True), (p, False)) - FermionOp.term(1.0, (p, True), (q, False))
    return (jordan_wigner(anti, n_qubits) * -1j).real()


def givens_gates(p: int, q: int, n_qubits: int, theta, ) -> list[Gate]:
    """``exp(theta/2 (a^_q a_p - a^_p a_q))`` as Pauli exponentials."""
    gen = single_excitation_generator(p, q, n_qubits)
    gates = []
    for t in gen.terms:
        gates += pauli_exponential_gates(t * 0.5, theta)
    return gates


def build_ucc3(theta1=None, theta2=None, theta3=None) -> Circuit:
    """ucc-1 double excitation (``theta3``) followed by one spin-conserving
    single excitation in the up block, qubits (0, 1), with ``theta1`` and in
    the down block, qubits (2, 3), with ``theta2``."""
    t1 = "theta1" if theta1 is None else theta1
    t2 = "theta2" if theta2 is None else theta2
    t3 = "theta3" if theta3 is None else theta3
    gates = pauli_exponential_gates(UCC1_GENERATOR, t3)
    gates += givens_gates(0, 1, 4, t1)
    gates += givens_gates(2, 3, 4, t2)
    names = tuple(t for t in (t1, t2, t3) if isinstance(t, str))
    return Circuit(4, tuple(gates), names)


def nearest_neighbor(n_qubits: int) -> list[tuple[int, int]]:
    return [(q, q + 1) for q in range(n_qubits - 1)]


def hwe_parameter_count(n_qubits: int, depth: int) -> int:
    return n_qubits * (3 * depth + 2)


def build_hwe(
    n_qubits: int,
    d: int,
    connectivity: Iterable[tuple[int, int]] | None = None,
    prefix: str = "t",
) -> Circuit:
    """Hardware-efficient ansatz with ``n_qubits * (3 d + 2)`` parameters.

    An RX-RZ layer on every qubit, then ``d`` blocks of CNOTs along
    ``connectivity`` (nearest-neighbour chain by default) followed by
    RZ-RX-RZ on every qubit.
    """
    if d < 0:
        raise ValueError("layer count must be non-negative")
    pairs = nearest_neighbor(n_qubits) if connectivity is None else [tuple(p) for p in connectivity]
    for a, b in pairs:
        if a == b or not (0 <= a < n_qubits and 0 <= b < n_qubits):
            raise ValueError(f"invalid connectivity pair {(a, b)} for {n_qubits} qubits")
    gates: list[Gate] = []
    names: list[str] = []

    def rot(kind, q):
        name = f"{prefix}{len(names)}"
        names.append(name)
        gates.append(Gate(kind, (q,), param=name))

    for q in range(n_qubits):
        rot("RX", q)
        rot("RZ", q)
    for _ in range(d):
        for a, b in pairs:
            gates.append(Gate("CNOT", (a, b)))
        for q in range(n_qubits):
            rot("RZ", q)
            rot("RX", q)
            rot("RZ", q)
    return Circuit(n_qubits, tuple(gates), tuple(names))


def trotter_circuit(generator: PauliSum, theta: float | str | None = None) -> Circuit:
    """First-order product ``prod_k exp(i theta c_k P_k)`` in canonical term order.

    Identity terms contribute a global phase and are skipped.
    """
    if not generator.is_hermitian():
        raise ValueError("trotter_circuit needs a Hermitian generator (real coefficients)")
    t = "theta" if theta is None else theta
    gates: list[Gate] = []
    for term in generator.terms:
        gates += pauli_exponential_gates(term.with_coefficient(term.coefficient.real), t)
    return Circuit(generator.n_qubits, tuple(gates), (t,) if isinstance(t, str) else ())


def uccsd_generator(n_qubits: int, n_electrons: int) -> list[tuple[str, PauliSum]]:
    """Spin-conserving singles and doubles from the Hartree-Fock determinant.

    Returns ``(name, G)`` pairs with ``T - T^dagger = i G`` for each excitation.
    """
    occ = hartree_fock_occupation(n_qubits, n_electrons)
    virt = [q for q in range(n_qubits) if q not in occ]
    half = n_qubits // 2
    spin = lambda p: p >= half  # noqa: E731
    out = []
    for i in occ:
        for a in virt:
            if spin(i) == spin(a):
                anti = FermionOp.term(1.0, (a, True), (i, False)) - FermionOp.term(1.0, (i, True), (a, False))
                out.append((f"s_{i}_{a}", (jordan_wigner(anti, n_qubits) * -1j).real()))
    for x, i in enumerate(occ):
        for j in occ[x + 1:]:
            for y, a in enumerate(virt):
                for b in virt[y + 1:]:
                    if sorted((spin(i), spin(j))) != sorted((spin(a), spin(b))):
                        continue
                    exc = FermionOp.term(1.0, (a, True), (b, True), (j, False), (i, False))
                    anti = exc - exc.adjoint()
                    g = (jordan_wigner(anti, n_qubits) * -1j).real()
                    if len(g):
                        out.append((f"d_{i}_{j}_{a}_{b}", g))
    return out


def build_uccsd_trotter(n_qubits: int, n_electrons: int) -> Circuit:
    """One Trotter step of UCCSD, one named parameter per excitation."""
    gates: list[Gate] = []
    names = []
    for name, gen in uccsd_generator(n_qubits, n_electrons):
        names.append(name)
        for term in gen.terms:
            gates += pauli_exponential_gates(term, name)
    return Circuit(n_qubits, tuple(gates), tuple(names))


def insert_cnot_pairs(c: Circuit, r: int) -> Circuit:
    """Replace every CNOT with ``r`` copies (``r`` odd); noiseless action unchanged."""
    if not isinstance(r, int) or r < 1 or r % 2 == 0:
        raise ValueError(f"noise amplification factor must be a positive odd integer, got {r!r}")
    if r == 1:
        return c
    gates = []
    for g in c.gates:
        gates.extend([g] * r if g.kind == "CNOT" else [g])
    return replace(c, gates=tuple(gates))
