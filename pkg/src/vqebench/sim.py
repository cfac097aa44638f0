"""Statevector and density-matrix simulation with CNOT depolarizing noise.

States are stored as tensors with one axis of length 2 per qubit (two per
qubit for density matrices), qubit 0 first. Flattening a statevector tensor
gives the big-endian amplitude vector, so bitstring ``"q0 q1 ... q(n-1)"``
read as a binary number is its basis index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, Gate, UnboundParameterError
from .pauli import PauliSum, PauliTerm, expectation_from_counts

MAX_DENSITY_QUBITS = 10
MAX_STATEVECTOR_QUBITS = 24

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise ValueError(kind)


def gate_matrix(g: Gate, values: Mapping[str, float] | None = None) -> np.ndarray:
    """2x2 matrix of a single-qubit gate."""
    if g.kind == "H":
        return _H
    if g.kind == "X":
        return _X
    return rotation_matrix(g.kind, g.bound_angle(values))


class SimulationSizeError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing strength per CNOT and optional per-qubit readout flips.

    Attributes:
        epsilon: weight of the two-qubit white-noise channel after each CNOT.
        readout: per-qubit ``(p(1|0), p(0|1))`` pairs, or None.
    """

    epsilon: float = 0.0
    readout: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon={self.epsilon} outside [0, 1]")
        if self.readout is not None:
            ro = tuple((float(a), float(b)) for a, b in self.readout)
            for a, b in ro:
                if not (0 <= a <= 1 and 0 <= b <= 1):
                    raise ValueError(f"readout probabilities {(a, b)} outside [0, 1]")
            object.__setattr__(self, "readout", ro)

    @classmethod
    def uniform(cls, n_qubits: int, epsilon: float = 0.0, p10: float = 0.0, p01: float = 0.0) -> "NoiseModel":
        ro = None if p10 == 0 and p01 == 0 else ((p10, p01),) * n_qubits
        return cls(epsilon, ro)

    @property
    def has_readout(self) -> bool:
        return self.readout is not None and any(a or b for a, b in self.readout)

    def readout_arrays(self, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
        if self.readout is None:
            return np.zeros(n_qubits), np.zeros(n_qubits)
        if len(self.readout) < n_qubits:
            raise ValueError(f"readout model covers {len(self.readout)} qubits, need {n_qubits}")
        ro = np.array(self.readout[:n_qubits], dtype=float)
        return ro[:, 0], ro[:, 1]

    def without_readout(self) -> "NoiseModel":
        return NoiseModel(self.epsilon, None)


NOISELESS = NoiseModel()


class CountsHistogram(Mapping):
    """Bitstring -> count, bitstrings ordered qubit 0 first."""

    def __init__(self, counts: Mapping[str, int], n_qubits: int | None = None):
        items = {k: int(v) for k, v in counts.items() if int(v) != 0}
        if n_qubits is None:
            n_qubits = len(next(iter(items))) if items else 0
        for k in items:
            if len(k) != n_qubits or set(k) - {"0", "1"}:
                raise ValueError(f"bitstring {k!r} does not match {n_qubits} qubits")
        self._counts = dict(sorted(items.items()))
        self.n_qubits = n_qubits
        self.shots = sum(self._counts.values())

    def __getitem__(self, key):
        return self._counts[key]

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    def __repr__(self):
        return f"CountsHistogram({self._counts}, shots={self.shots})"

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self._counts.items()}

    def merged(self, other: "CountsHistogram") -> "CountsHistogram":
        out = dict(self._counts)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return CountsHistogram(out, self.n_qubits)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure (``kind="statevector"``) or mixed (``kind="density"``) state."""

    n_qubits: int
    data: np.ndarray = field(repr=False)
    kind: str = "statevector"

    @property
    def is_density(self) -> bool:
        return self.kind == "density"

    def vector(self) -> np.ndarray:
        if self.is_density:
            raise TypeError("mixed state has no statevector")
        return self.data.reshape(-1)

    def density_matrix(self) -> np.ndarray:
        dim = 2 ** self.n_qubits
        if self.is_density:
            return self.data.reshape(dim, dim)
        v = self.data.reshape(-1)
        return np.outer(v, v.conj())

    def probabilities(self) -> np.ndarray:
        if self.is_density:
            dim = 2 ** self.n_qubits
            p = np.real(np.diagonal(self.data.reshape(dim, dim))).copy()
        else:
            p = np.abs(self.data.reshape(-1)) ** 2
        p = np.clip(p, 0.0, None)
        return p / p.sum()

    def expectation(self, op) -> float | complex:
        """Exact ``<O>`` for a PauliTerm (coefficient applied) or PauliSum."""
        terms = [op] if isinstance(op, PauliTerm) else list(op.terms)
        total = 0.0
        for t in terms:
            total += t.coefficient * pauli_string_expectation(self, t)
        if abs(np.imag(total)) < 1e-12:
            return float(np.real(total))
        return complex(total)

    def check(self, tol: float = 1e-10) -> None:
        if self.is_density:
            rho = self.density_matrix()
            if abs(np.trace(rho) - 1) > tol:
                raise AssertionError(f"trace {np.trace(rho)} != 1")
            if np.abs(rho - rho.conj().T).max() > tol:
                raise AssertionError("density matrix is not Hermitian")
            if np.linalg.eigvalsh(rho).min() < -1e-9:
                raise AssertionError("density matrix is not positive semidefinite")
        elif abs(np.linalg.norm(self.data) - 1) > tol:
            raise AssertionError("statevector is not normalized")


def zero_state(n_qubits: int, density: bool = False) -> QuantumState:
    if density:
        if n_qubits > MAX_DENSITY_QUBITS:
            raise SimulationSizeError(f"density simulation limited to {MAX_DENSITY_QUBITS} qubits")
        t = np.zeros((2,) * (2 * n_qubits), dtype=complex)
        t[(0,) * (2 * n_qubits)] = 1.0
        return QuantumState(n_qubits, t, "density")
    if n_qubits > MAX_STATEVECTOR_QUBITS:
        raise SimulationSizeError(f"statevector simulation limited to {MAX_STATEVECTOR_QUBITS} qubits")
    t = np.zeros((2,) * n_qubits, dtype=complex)
    t[(0,) * n_qubits] = 1.0
    return QuantumState(n_qubits, t, "statevector")


def _apply_1q(t: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(u, t, axes=([1], [axis])), 0, axis)


def _apply_cnot(t: np.ndarray, control: int, target: int) -> np.ndarray:
    t = t.copy()
    idx = [slice(None)] * t.ndim
    idx[control] = 1
    sub_target = target - (1 if target > control else 0)
    t[tuple(idx)] = np.flip(t[tuple(idx)], axis=sub_target)
    return t


def _letters(k: int) -> str:
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[:k]


def depolarize_pair(t: np.ndarray, n: int, a: int, b: int, eps: float) -> np.ndarray:
    """``(1 - eps) rho + eps * Tr_ab(rho) (x) I_ab / 4`` on a density tensor."""
    if eps == 0:
        return t
    L = list(_letters(2 * n))
    src = L.copy()
    src[n + a] = src[a]
    src[n + b] = src[b]
    kept = [L[k] for k in range(2 * n) if k not in (a, b, n + a, n + b)]
    traced = np.einsum("".join(src) + "->" + "".join(kept), t)
    eye = np.eye(2)
    mixed = np.einsum(
        "".join(kept) + f",{L[a]}{L[n + a]},{L[b]}{L[n + b]}->" + "".join(L),
        traced, eye, eye,
    ) / 4.0
    return (1.0 - eps) * t + eps * mixed


def apply_gates(
    state: QuantumState,
    gates: Sequence[Gate],
    noise: NoiseModel = NOISELESS,
    values: Mapping[str, float] | None = None,
) -> QuantumState:
    """Return a new state with ``gates`` applied in order."""
    n = state.n_qubits
    t = state.data
    dens = state.is_density
    for g in gates:
        if g.kind == "CNOT":
            c, tg = g.qubits
            t = _apply_cnot(t, c, tg)
            if dens:
                t = _apply_cnot(t, n + c, n + tg)
                t = depolarize_pair(t, n, c, tg, noise.epsilon)
        else:
            u = gate_matrix(g, values)
            q = g.qubits[0]
            t = _apply_1q(t, u, q)
            if dens:
                t = _apply_1q(t, u.conj(), n + q)
    return QuantumState(n, t, state.kind)


def _values_for(c: Circuit, params) -> Mapping[str, float] | None:
    if params is None:
        unbound = [g.param for g in c.gates if g.param is not None]
        if unbound:
            raise UnboundParameterError(f"parameter {unbound[0]!r} is not bound")
        return None
    if isinstance(params, Mapping):
        return params
    params = list(params)
    if len(params) != len(c.parameters):
        raise ValueError(f"expected {len(c.parameters)} parameter values, got {len(params)}")
    return dict(zip(c.parameters, params))


def run_statevector(c: Circuit, params=None) -> QuantumState:
    """Noiseless evolution of ``|0...0>``."""
    values = _values_for(c, params)
    return apply_gates(zero_state(c.n_qubits), c.gates, NOISELESS, values)


def run_density(c: Circuit, noise: NoiseModel = NOISELESS, params=None) -> QuantumState:
    """Density-matrix evolution with the depolarizing channel after each CNOT."""
    if c.n_qubits > MAX_DENSITY_QUBITS:
        raise SimulationSizeError(f"density simulation limited to {MAX_DENSITY_QUBITS} qubits")
    values = _values_for(c, params)
    return apply_gates(zero_state(c.n_qubits, density=True), c.gates, noise, values)


def run(c: Circuit, noise: NoiseModel = NOISELESS, params=None) -> QuantumState:
    """Statevector when the gate noise is zero, density matrix otherwise."""
    if noise.epsilon > 0:
        return run_density(c, noise, params)
    return run_statevector(c, params)


def circuit_unitary(c: Circuit, params=None) -> np.ndarray:
    """Dense unitary of ``c`` (columns are images of basis states)."""
    values = _values_for(c, params)
    n = c.n_qubits
    dim = 2 ** n
    t = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        if g.kind == "CNOT":
            t = _apply_cnot(t, *g.qubits)
        else:
            t = _apply_1q(t, gate_matrix(g, values), g.qubits[0])
    return t.reshape(dim, dim)


def _masks(term: PauliTerm, n: int) -> tuple[int, int, int]:
    xm = zm = ny = 0
    for q, l in term.letters:
        bit = 1 << (n - 1 - q)
        if l in "XY":
            xm |= bit
        if l in "YZ":
            zm |= bit
        if l == "Y":
            ny += 1
    return xm, zm, ny


def pauli_string_expectation(state: QuantumState, term: PauliTerm) -> complex:
    """``<P>`` for the bare Pauli string of ``term`` (coefficient ignored)."""
    n = state.n_qubits
    dim = 2 ** n
    xm, zm, ny = _masks(term, n)
    idx = np.arange(dim)
    phase = (1j) ** ny * (1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1))
    flipped = idx ^ xm
    if state.is_density:
        rho = state.data.reshape(dim, dim)
        return complex(np.sum(rho[idx, flipped] * phase))
    v = state.data.reshape(-1)
    return complex(np.sum(v[flipped].conj() * phase * v))


def measurement_basis_gates(term: PauliTerm) -> list[Gate]:
    """Single-qubit rotations that map ``term``'s letters onto Z."""
    gates = []
    for q, l in term.letters:
        if l == "X":
            gates.append(Gate("H", (q,)))
        elif l == "Y":
            gates.append(Gate("RX", (q,), angle=math.pi / 2))
    return gates


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_counts(
    s: QuantumState,
    shots: int,
    noise: NoiseModel = NOISELESS,
    seed=None,
) -> CountsHistogram:
    """Draw ``shots`` computational-basis outcomes, then apply readout flips."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = _rng(seed)
    n = s.n_qubits
    probs = s.probabilities()
    hits = rng.multinomial(shots, probs)
    outcomes = np.repeat(np.arange(len(probs)), hits)
    if noise.has_readout and n:
        p10, p01 = noise.readout_arrays(n)
        bits = (outcomes[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
        flip_p = np.where(bits == 0, p10[None, :], p01[None, :])
        flips = rng.random(bits.shape) < flip_p
        bits = bits ^ flips
        outcomes = (bits << (n - 1 - np.arange(n))[None, :]).sum(axis=1)
    values, freq = np.unique(outcomes, return_counts=True)
    fmt = f"0{n}b"
    return CountsHistogram({format(int(v), fmt) if n else "": int(f) for v, f in zip(values, freq)}, n)


def readout_parity_weights(term_qubits: Sequence[int], n: int, p10: np.ndarray, p01: np.ndarray) -> np.ndarray:
    """``E[(-1)^{observed parity}]`` given each true basis state, under independent flips."""
    dim = 2 ** n
    idx = np.arange(dim)
    w = np.ones(dim)
    for q in term_qubits:
        bit = (idx >> (n - 1 - q)) & 1
        pp, pm = p01[q] + p10[q], p01[q] - p10[q]
        w *= (1 - pp) * (1 - 2 * bit) + pm
    return w


@dataclass(frozen=True)
class EnergyEstimate:
    """Measured (or exactly evaluated, ``shots == 0``) energy with its standard error."""

    value: float
    stderr: float = 0.0
    shots: int = 0
    seed: int | None = None
    n_terms: int = 0
    flags: tuple[str, ...] = ()
    extra: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "stderr", float(self.stderr))
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")
        if self.shots < 0:
            raise ValueError("shots must be non-negative")

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        d = {
            "value": self.value,
            "stderr": self.stderr,
            "shots": self.shots,
            "seed": self.seed,
            "n_terms": self.n_terms,
            "flags": list(self.flags),
        }
        if self.extra:
            d["extra"] = dict(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _seed_int(seed) -> int | None:
    if seed is None or isinstance(seed, (int, np.integer)):
        return None if seed is None else int(seed)
    return None


def estimate_terms(
    state: QuantumState,
    terms: Sequence[PauliTerm],
    shots: int,
    noise: NoiseModel = NOISELESS,
    seed=None,
    readout_cal=None,
) -> list[tuple[float, float]]:
    """Per-string ``(mean, stderr)`` for the bare Pauli strings of ``terms``.

    ``shots == 0`` evaluates expectations exactly, folding in the readout
    model analytically when one is present. ``readout_cal`` (any object with
    ``corrected_expectation`` / ``corrected_exact`` / ``error_scale``) applies
    readout correction.
    """
    n = state.n_qubits
    exact_plain = shots == 0 and not noise.has_readout and readout_cal is None
    children = as_seed_sequence(seed).spawn(len(terms)) if shots else [None] * len(terms)
    out = []
    for t, child in zip(terms, children):
        if t.is_identity:
            out.append((1.0, 0.0))
            continue
        if exact_plain:
            out.append((float(np.real(pauli_string_expectation(state, t))), 0.0))
            continue
        rotated = apply_gates(state, measurement_basis_gates(t))
        if shots == 0:
            probs = rotated.probabilities()
            p10, p01 = noise.readout_arrays(n)
            if readout_cal is not None:
                val = readout_cal.corrected_exact(t, probs, p10, p01)
            else:
                val = float(probs @ readout_parity_weights(t.qubits, n, p10, p01))
            out.append((val, 0.0))
            continue
        counts = sample_counts(rotated, shots, noise, np.random.default_rng(child))
        if readout_cal is not None:
            val = readout_cal.corrected_expectation(t, counts)
            raw = expectation_from_counts(t, counts)
            err = math.sqrt(max(0.0, 1 - raw ** 2) / shots) * readout_cal.error_scale(t)
        else:
            val = expectation_from_counts(t, counts)
            err = math.sqrt(max(0.0, 1 - val ** 2) / shots)
        out.append((val, err))
    return out


def measure_pauli_sum(
    ansatz: Circuit,
    h: PauliSum,
    shots: int,
    noise: NoiseModel = NOISELESS,
    seed=None,
    params=None,
    readout_cal=None,
    state: QuantumState | None = None,
) -> EnergyEstimate:
    """Estimate ``<H>`` term by term.

    Each non-identity term is measured with ``shots`` shots in its own
    rotated basis; ``shots == 0`` is the exact-expectation path. The standard
    error is the root-sum-square of ``|c_k| * sigma_k``.
    """
    if h.n_qubits != ansatz.n_qubits:
        raise ValueError(f"Hamiltonian has {h.n_qubits} qubits, circuit has {ansatz.n_qubits}")
    terms = h.non_identity()
    const = float(np.real(h.identity_coefficient()))
    flags = []
    if noise.epsilon > 0:
        flags.append(f"epsilon={noise.epsilon:g}")
    if readout_cal is not None:
        flags.append("readout-corrected")
    if not terms:
        return EnergyEstimate(const, 0.0, shots, _seed_int(seed), 0, tuple(flags))
    if state is None:
        state = run(ansatz, noise, params)
    stats = estimate_terms(state, terms, shots, noise, seed, readout_cal)
    value = const
    var = 0.0
    for t, (m, e) in zip(terms, stats):
        value += float(np.real(t.coefficient)) * m
        var += (abs(t.coefficient) * e) ** 2
    return EnergyEstimate(value, math.sqrt(var), shots, _seed_int(seed), len(terms), tuple(flags))


def measure_rdm2(
    ansatz: Circuit,
    n_active: int,
    shots: int,
    noise: NoiseModel = NOISELESS,
    seed=None,
    params=None,
    n_electrons: int = 2,
    readout_cal=None,
    state: QuantumState | None = None,
):
    """Estimate the two-body RDM ``rho[p,q,r,s] = <a^_p a^_q a_s a_r>``.

    Every distinct Pauli string needed by the Hermitian and anti-Hermitian
    parts of the independent elements is measured once and shared.
    """
    from .rdm import RDM2, rdm2_measurement_plan

    if n_active != ansatz.n_qubits:
        raise ValueError(f"n_active={n_active} does not match {ansatz.n_qubits}-qubit circuit")
    plan, strings = rdm2_measurement_plan(n_active)
    if state is None:
        state = run(ansatz, noise, params)
    stats = estimate_terms(state, strings, shots, noise, seed, readout_cal)
    means = {s.letters: m for s, (m, _) in zip(strings, stats)}
    return RDM2.from_plan(plan, means, n_active, n_electrons)
