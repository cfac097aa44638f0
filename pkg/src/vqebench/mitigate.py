"""Error mitigation: readout correction, zero-noise extrapolation, 2-RDM purification."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate
from .pauli import PauliTerm
from .rdm import RDM2, energy_from_rdm, rdm1_from_rdm2
from .sim import CountsHistogram, NoiseModel, as_seed_sequence, run_statevector, sample_counts


# ---------------------------------------------------------------------------
# readout


@dataclass(frozen=True, eq=False)
class ReadoutCal:
    """Per-qubit flip probabilities ``p(1|0)`` and ``p(0|1)``."""

    p10: np.ndarray
    p01: np.ndarray

    def __post_init__(self):
        p10 = np.array(self.p10, dtype=float)
        p01 = np.array(self.p01, dtype=float)
        if p10.shape != p01.shape or p10.ndim != 1:
            raise ValueError("p10 and p01 must be equal-length vectors")
        if ((p10 < 0) | (p10 > 1) | (p01 < 0) | (p01 > 1)).any():
            raise ValueError("readout probabilities must lie in [0, 1]")
        object.__setattr__(self, "p10", p10)
        object.__setattr__(self, "p01", p01)

    @classmethod
    def zeros(cls, n_qubits: int) -> "ReadoutCal":
        return cls(np.zeros(n_qubits), np.zeros(n_qubits))

    @classmethod
    def from_noise(cls, noise: NoiseModel, n_qubits: int) -> "ReadoutCal":
        p10, p01 = noise.readout_arrays(n_qubits)
        return cls(p10, p01)

    @property
    def n_qubits(self) -> int:
        return len(self.p10)

    @property
    def p_plus(self) -> np.ndarray:
        return self.p01 + self.p10

    @property
    def p_minus(self) -> np.ndarray:
        return self.p01 - self.p10

    def _guard(self, sites: Sequence[int]) -> None:
        for q in sites:
            if q >= self.n_qubits:
                raise ValueError(f"no calibration for qubit {q}")
            if 1.0 - self.p_plus[q] <= 0.0:
                raise ZeroDivisionError(
                    f"readout correction undefined on qubit {q}: 1 - p+ = {1.0 - self.p_plus[q]:g}"
                )

    def corrected_expectation(self, term: PauliTerm, counts) -> float:
        return corrected_expectation(term, counts, self)

    def corrected_exact(self, term: PauliTerm, probs: np.ndarray, true_p10: np.ndarray, true_p01: np.ndarray) -> float:
        """Expected corrected value given exact basis probabilities and the true flip rates."""
        sites = term.qubits
        self._guard(sites)
        n = int(round(math.log2(len(probs))))
        idx = np.arange(len(probs))
        w = np.ones(len(probs))
        for q in sites:
            sign = 1 - 2 * ((idx >> (n - 1 - q)) & 1)
            observed = (1 - true_p01[q] - true_p10[q]) * sign + (true_p01[q] - true_p10[q])
            w *= (observed - self.p_minus[q]) / (1 - self.p_plus[q])
        return float(probs @ w)

    def error_scale(self, term: PauliTerm) -> float:
        return float(np.prod([1.0 / (1.0 - self.p_plus[q]) for q in term.qubits]))

    def to_dict(self) -> dict:
        return {"p10": self.p10.tolist(), "p01": self.p01.tolist()}


def corrected_expectation(term: PauliTerm, counts, cal: ReadoutCal) -> float:
    """Readout-corrected ``<Z...Z>`` on ``term``'s qubits.

    Each observed bit contributes ``((-1)^x_i - p-_i) / (1 - p+_i)``; with an
    all-zero calibration this is exactly the raw parity average.
    """
    sites = term.qubits
    cal._guard(sites)
    items = list(counts.items())
    shots = sum(c for _, c in items)
    if shots <= 0:
        raise ValueError("empty counts histogram")
    pm, pp = cal.p_minus, cal.p_plus
    total = 0.0
    for bits, c in items:
        w = 1.0
        for q in sites:
            w *= ((-1.0 if bits[q] == "1" else 1.0) - pm[q]) / (1.0 - pp[q])
        total += c * w
    return total / shots


def calibrate_readout(n_qubits: int, shots: int, noise: NoiseModel, seed=None) -> ReadoutCal:
    """Estimate per-qubit flip rates from ``|0...0>`` and ``|1...1>`` preparations.

    Under the uncorrelated model each qubit's ``p(1|0)`` comes from the
    all-zeros run and its ``p(0|1)`` from the all-ones run.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    s0, s1 = as_seed_sequence(seed).spawn(2)
    zeros = run_statevector(Circuit(n_qubits))
    ones = run_statevector(Circuit(n_qubits, tuple(Gate("X", (q,)) for q in range(n_qubits))))
    c0 = sample_counts(zeros, shots, noise, np.random.default_rng(s0))
    c1 = sample_counts(ones, shots, noise, np.random.default_rng(s1))
    p10 = np.array([_bit_fraction(c0, q, "1") for q in range(n_qubits)])
    p01 = np.array([_bit_fraction(c1, q, "0") for q in range(n_qubits)])
    return ReadoutCal(p10, p01)


def _bit_fraction(counts: CountsHistogram, q: int, value: str) -> float:
    return sum(c for b, c in counts.items() if b[q] == value) / counts.shots


# ---------------------------------------------------------------------------
# zero-noise extrapolation


class ExtrapolationError(ValueError):
    pass


@dataclass(frozen=True)
class ExtrapolationFit:
    points: tuple[tuple[int, float, float], ...]
    order: int
    intercept: float
    intercept_sigma: float
    coefficients: tuple[float, ...] = ()
    chi2: float = 0.0

    def predict(self, r) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(r, dtype=float), self.coefficients)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "intercept": self.intercept,
            "intercept_sigma": self.intercept_sigma,
            "coefficients": list(self.coefficients),
            "chi2": self.chi2,
            "points": [list(p) for p in self.points],
        }


def richardson_extrapolate(points: Sequence[tuple[int, float, float]], order: int) -> ExtrapolationFit:
    """Weighted least-squares polynomial in the CNOT factor ``r``, read at ``r = 0``.

    Args:
        points: ``(r, energy, sigma)`` triples; sigmas must be positive.
        order: polynomial degree (1 linear, 2 quadratic).

    Returns:
        ExtrapolationFit whose ``intercept_sigma`` propagates the input sigmas
        through the fit covariance.
    """
    pts = [(int(r), float(e), float(s)) for r, e, s in points]
    if order < 1:
        raise ExtrapolationError("order must be >= 1")
    if len(pts) < order + 1:
        raise ExtrapolationError(f"order {order} needs at least {order + 1} points, got {len(pts)}")
    rs = np.array([p[0] for p in pts], dtype=float)
    if len(set(rs.tolist())) < order + 1:
        raise ExtrapolationError("not enough distinct noise factors for the requested order")
    sig = np.array([p[2] for p in pts])
    if (sig <= 0).any() or not np.isfinite(sig).all():
        raise ExtrapolationError("sigmas must be positive and finite")
    y = np.array([p[1] for p in pts])
    v = np.vander(rs, order + 1, increasing=True)
    w = 1.0 / sig ** 2
    normal = v.T @ (w[:, None] * v)
    rhs = v.T @ (w * y)
    try:
        coef = np.linalg.solve(normal, rhs)
        cov = np.linalg.inv(normal)
    except np.linalg.LinAlgError:
        raise ExtrapolationError("degenerate design matrix") from None
    resid = y - v @ coef
    return ExtrapolationFit(
        tuple(pts),
        order,
        float(coef[0]),
        float(math.sqrt(max(cov[0, 0], 0.0))),
        tuple(float(c) for c in coef),
        float(np.sum(w * resid ** 2)),
    )


# ---------------------------------------------------------------------------
# McWeeny purification


def mcweeny_step(x: np.ndarray) -> np.ndarray:
    """One iteration ``3 x^2 - 2 x^3`` with the pair-index matrix product."""
    x2 = x @ x
    return 3.0 * x2 - 2.0 * x2 @ x


def idempotency_residual(x: np.ndarray) -> float:
    return float(abs(np.trace(x @ x - x)))


def mcweeny_purify(rdm: RDM2, tol: float = 1e-8, max_iter: int = 100) -> RDM2:
    """Drive the pair matrix towards a projector.

    The pair matrix is divided by its largest eigenvalue, iterated with
    :func:`mcweeny_step` until ``|Tr(x^2 - x)| < tol``, and rescaled so its
    trace is ``M (M - 1)``. The returned RDM2 carries ``info`` with the
    iteration count, final residual and a ``converged`` flag.
    """
    m = rdm.n_electrons
    if m != 2:
        warnings.warn(f"purification is defined here for 2 electrons only (got {m})", stacklevel=2)
    d = rdm.pair_matrix()
    d = 0.5 * (d + d.conj().T)
    lam = float(np.linalg.eigvalsh(d).max())
    if lam <= 0:
        raise ValueError("pair matrix has no positive eigenvalue; cannot purify")
    x = d / lam
    residual = idempotency_residual(x)
    it = 0
    while residual >= tol and it < max_iter:
        x = mcweeny_step(x)
        x = 0.5 * (x + x.conj().T)
        it += 1
        residual = idempotency_residual(x)
        bad = RDM2.from_pair_matrix(x, m).invariant_violation()
        if bad > 1e-8 * max(1.0, np.abs(x).max()):
            raise FloatingPointError(f"purification broke RDM symmetry (violation {bad:g})")
    trace = float(np.real(np.trace(x)))
    pairs = m * (m - 1)
    scale = pairs / trace if trace > 0 else lam
    converged = residual < tol
    info = {
        "iterations": it,
        "residual": residual,
        "converged": converged,
        "dominant_eigenvalue": lam,
        "electron_count_supported": m == 2,
    }
    out = RDM2(RDM2.from_pair_matrix(x * scale, m).tensor, m, info)
    if not converged:
        warnings.warn(f"McWeeny purification did not converge in {max_iter} iterations "
                      f"(residual {residual:.3g})", stacklevel=2)
    return out


__all__ = [
    "ExtrapolationError",
    "ExtrapolationFit",
    "RDM2",
    "ReadoutCal",
    "calibrate_readout",
    "corrected_expectation",
    "energy_from_rdm",
    "idempotency_residual",
    "mcweeny_purify",
    "mcweeny_step",
    "rdm1_from_rdm2",
    "richardson_extrapolate",
]
