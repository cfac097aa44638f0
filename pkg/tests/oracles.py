"""Independent reference implementations used by the tests.

Nothing here goes through the package's Jordan-Wigner, Pauli algebra or
integral bookkeeping. The Fock-space builder works directly with creation and
annihilation operators on occupation bitstrings, in the spatial-orbital
chemists' notation

    H = E_nuc + sum_{pq,s} h[p,q] a+_{ps} a_{qs}
        + 1/2 sum_{pqrs,s,t} (pq|rs) a+_{ps} a+_{rt} a_{st} a_{qs}

with spin orbital ``p + n * s`` for spin ``s`` in {0 (up), 1 (down)}.
"""

from __future__ import annotations

import itertools

import numpy as np

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


# ---------------------------------------------------------------------------
# occupation-number basis


def _occ(state: int, mode: int, n_modes: int) -> int:
    # mode 0 is the most significant bit so basis order matches qubit order
    return (state >> (n_modes - 1 - mode)) & 1


def apply_op(state: int, mode: int, create: bool, n_modes: int):
    """Apply a single ladder operator; returns (sign, new_state) or None."""
    occ = _occ(state, mode, n_modes)
    if create == bool(occ):
        return None
    below = sum(_occ(state, m, n_modes) for m in range(mode))
    sign = -1 if below % 2 else 1
    return sign, state ^ (1 << (n_modes - 1 - mode))


def apply_string(state: int, ops, n_modes: int):
    """``ops`` is written left to right as in the operator product; applied right to left."""
    sign = 1
    for mode, create in reversed(ops):
        r = apply_op(state, mode, create, n_modes)
        if r is None:
            return None
        s, state = r
        sign *= s
    return sign, state


def operator_matrix(terms, n_modes: int) -> np.ndarray:
    """Dense matrix of ``sum coeff * ops`` in the occupation basis."""
    dim = 2 ** n_modes
    m = np.zeros((dim, dim), dtype=complex)
    for coeff, ops in terms:
        for col in range(dim):
            r = apply_string(col, ops, n_modes)
            if r is not None:
                m[r[1], col] += coeff * r[0]
    return m


def spatial_hamiltonian_terms(h: np.ndarray, eri: np.ndarray, e_nuc: float):
    n = h.shape[0]
    terms = [(e_nuc, ())]
    for p, q in itertools.product(range(n), repeat=2):
        if h[p, q] == 0:
            continue
        for s in (0, 1):
            terms.append((h[p, q], ((p + n * s, True), (q + n * s, False))))
    for p, q, r, t in itertools.product(range(n), repeat=4):
        v = eri[p, q, r, t]
        if v == 0:
            continue
        for s1, s2 in itertools.product((0, 1), repeat=2):
            a, b = p + n * s1, q + n * s1
            c, d = r + n * s2, t + n * s2
            terms.append((0.5 * v, ((a, True), (c, True), (d, False), (b, False))))
    return terms


def fock_matrix(h: np.ndarray, eri: np.ndarray, e_nuc: float) -> np.ndarray:
    n = h.shape[0]
    return operator_matrix(spatial_hamiltonian_terms(h, eri, e_nuc), 2 * n)


def sector_indices(n_modes: int, n_electrons: int, occupied=(), empty=()) -> np.ndarray:
    out = []
    for s in range(2 ** n_modes):
        bits = [_occ(s, m, n_modes) for m in range(n_modes)]
        if sum(bits) != n_electrons:
            continue
        if any(not bits[m] for m in occupied) or any(bits[m] for m in empty):
            continue
        out.append(s)
    return np.array(out, dtype=int)


def sector_ground(mat: np.ndarray, idx: np.ndarray) -> float:
    sub = mat[np.ix_(idx, idx)]
    return float(np.linalg.eigvalsh(sub)[0])


def number_operator_expectations(psi: np.ndarray, n_modes: int) -> np.ndarray:
    """Dense ``<a+_p a_q>`` from a statevector."""
    out = np.zeros((n_modes, n_modes), dtype=complex)
    for p, q in itertools.product(range(n_modes), repeat=2):
        m = operator_matrix([(1.0, ((p, True), (q, False)))], n_modes)
        out[p, q] = psi.conj() @ m @ psi
    return out


# ---------------------------------------------------------------------------
# Pauli strings by index bits


def pauli_by_bits(letters: dict, n_qubits: int) -> np.ndarray:
    """Matrix of a Pauli string from its action on each basis state."""
    dim = 2 ** n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        amp = 1.0 + 0j
        row = col
        for q, l in letters.items():
            bit = (col >> (n_qubits - 1 - q)) & 1
            if l in "XY":
                row ^= 1 << (n_qubits - 1 - q)
            if l == "Z":
                amp *= -1 if bit else 1
            elif l == "Y":
                amp *= 1j if bit == 0 else -1j
        m[row, col] += amp
    return m


def kron_string(letters: dict, n_qubits: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in range(n_qubits):
        out = np.kron(out, _SINGLE[letters.get(q, "I")])
    return out


# ---------------------------------------------------------------------------
# random integrals


def random_spatial_integrals(n: int, rng: np.random.Generator, scale: float = 0.5):
    """Real ``h`` and an 8-fold symmetric, positive semidefinite ERI ``(pq|rs)``."""
    a = rng.normal(size=(n, n))
    h = -np.diag(np.sort(rng.uniform(0.5, 2.0, n))[::-1]) + 0.1 * (a + a.T)
    chol = []
    for _ in range(n * (n + 1) // 2):
        l = rng.normal(size=(n, n)) * scale / n
        chol.append(l + l.T)
    eri = np.einsum("kpq,krs->pqrs", chol, chol)
    return h, eri, float(rng.uniform(0.2, 1.0))


def to_spin_orbital(h: np.ndarray, eri: np.ndarray):
    """Spin-orbital ``h1`` and ``g[p,q,r,s] = <pq|sr>`` (up block first)."""
    n = h.shape[0]
    m = 2 * n
    h1 = np.zeros((m, m))
    g = np.zeros((m, m, m, m))
    for s in (0, 1):
        h1[s * n:(s + 1) * n, s * n:(s + 1) * n] = h
    for p, q, r, t in itertools.product(range(m), repeat=4):
        # <pq|tr> = (pt|qr) with matching spins
        if p // n == t // n and q // n == r // n:
            g[p, q, r, t] = eri[p % n, t % n, q % n, r % n]
    return h1, g


def global_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-norm of ``u - e^{i phi} v`` for the best phase."""
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    phase = u[k] / v[k]
    phase /= abs(phase)
    return float(np.abs(u - phase * v).max())


# ---------------------------------------------------------------------------
# gate-by-gate unitaries via Kronecker products


def _gate_1q(kind: str, angle: float | None) -> np.ndarray:
    if kind == "X":
        return _SINGLE["X"]
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    p = _SINGLE[kind[1]]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * p


def embed(op: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, op if k == q else np.eye(2))
    return out


def cnot_matrix(control: int, target: int, n: int) -> np.ndarray:
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    a = embed(p0, control, n)
    b = embed(p1, control, n) @ embed(_SINGLE["X"], target, n)
    return a + b


def kron_circuit_unitary(circuit, values=None) -> np.ndarray:
    """Multiply full-size gate matrices; independent of the simulator's tensor code."""
    n = circuit.n_qubits
    u = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        if g.kind == "CNOT":
            m = cnot_matrix(*g.qubits, n)
        else:
            angle = g.angle if g.param is None else g.scale * values[g.param]
            m = embed(_gate_1q(g.kind, angle), g.qubits[0], n)
        u = m @ u
    return u


def basis_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v
