"""Optimizers, the VQE loop and the exact-diagonalization oracle."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import eigsh

from .circuit import (
    Circuit,
    build_hwe,
    build_ucc1,
    build_ucc3,
    build_uccsd_trotter,
    hartree_fock_reference,
    insert_cnot_pairs,
)
from .integrals import IntegralSet
from .mitigate import (
    ExtrapolationFit,
    ReadoutCal,
    calibrate_readout,
    energy_from_rdm,
    mcweeny_purify,
    richardson_extrapolate,
)
from .pauli import DenseSizeError, PauliSum, pauli_sparse_matrix
from .sim import NOISELESS, EnergyEstimate, NoiseModel, measure_pauli_sum, measure_rdm2, run

MAX_ORACLE_QUBITS = 14
DENSE_EIG_DIM = 4096

Objective = Callable[[np.ndarray], EnergyEstimate]


class ObjectiveError(RuntimeError):
    """An objective evaluation failed; the message names where."""


# ---------------------------------------------------------------------------
# exact oracle


def exact_ground_energy(h: PauliSum, n_electrons: int | None = None) -> float:
    """Lowest eigenvalue of ``h``, optionally within one Hamming-weight sector.

    Under Jordan-Wigner the Hamming weight of a basis state is its particle
    number, so ``n_electrons`` restricts to that sector.
    """
    n = h.n_qubits
    if n > MAX_ORACLE_QUBITS:
        raise DenseSizeError(f"{n} qubits exceeds the oracle limit of {MAX_ORACLE_QUBITS}")
    mat = pauli_sparse_matrix(h)
    if n_electrons is not None:
        if not 0 <= n_electrons <= n:
            raise ValueError(f"n_electrons={n_electrons} outside 0..{n}")
        idx = np.array([i for i in range(2 ** n) if i.bit_count() == n_electrons])
        mat = mat[idx][:, idx]
    dim = mat.shape[0]
    if dim <= DENSE_EIG_DIM:
        return float(np.linalg.eigvalsh(mat.toarray())[0])
    # fixed start vector keeps the result deterministic
    val = eigsh(mat, k=1, which="SA", v0=np.ones(dim), tol=1e-12)[0]
    return float(val[0])


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    theta: tuple[float, ...]
    estimate: EnergyEstimate
    optimum: bool = False

    @property
    def value(self) -> float:
        return self.estimate.value

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "theta": list(self.theta),
            "energy": self.estimate.value,
            "stderr": self.estimate.stderr,
            "optimum": self.optimum,
        }


@dataclass
class VqeTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    method: str = ""
    hit_max_iter: bool = False
    message: str = ""
    n_iterations: int = 0

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def record(self, theta, estimate: EnergyEstimate) -> TraceEntry:
        it = self.entries[-1].iteration + 1 if self.entries else 0
        e = TraceEntry(it, tuple(float(t) for t in theta), estimate)
        self.entries.append(e)
        return e

    def best(self) -> TraceEntry:
        evaluated = [e for e in self.entries if not e.optimum]
        if not evaluated:
            raise ValueError("empty trace")
        # ties go to the earliest evaluation
        return min(evaluated, key=lambda e: (e.value, e.iteration))

    def finalize(self) -> TraceEntry:
        b = self.best()
        last = self.entries[-1].iteration
        e = TraceEntry(last + 1, b.theta, b.estimate, optimum=True)
        self.entries.append(e)
        return e

    @property
    def optimum(self) -> TraceEntry:
        if not self.entries or not self.entries[-1].optimum:
            raise ValueError("trace has not been finalized")
        return self.entries[-1]

    @property
    def n_evaluations(self) -> int:
        return sum(not e.optimum for e in self.entries)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in self.entries)


class CachedObjective:
    """Memoize an objective on ``(theta, seed)``."""

    def __init__(self, fn: Objective, seed=None):
        self.fn = fn
        self.seed = seed
        self.cache: dict = {}
        self.calls = 0

    def __call__(self, theta) -> EnergyEstimate:
        key = (tuple(float(t) for t in np.atleast_1d(theta)), self.seed)
        if key not in self.cache:
            self.calls += 1
            self.cache[key] = self.fn(np.array(key[0]))
        return self.cache[key]


# ---------------------------------------------------------------------------
# optimizers


@dataclass(frozen=True)
class SweepResult:
    theta: float
    energy: float
    thetas: np.ndarray
    samples: tuple[EnergyEstimate, ...]
    spline: CubicSpline = field(repr=False, compare=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])

    def curve(self, n: int = 200) -> tuple[np.ndarray, np.ndarray]:
        x = np.linspace(self.thetas[0], self.thetas[-1], n)
        return x, self.spline(x)


def _as_estimate(v) -> EnergyEstimate:
    return v if isinstance(v, EnergyEstimate) else EnergyEstimate(float(v))


def sweep_minimize(
    objective: Callable[[float], EnergyEstimate | float],
    lo: float = -math.pi,
    hi: float = math.pi,
    n_points: int = 25,
    dense_points: int = 10_000,
) -> SweepResult:
    """Grid scan, natural cubic spline, and argmin of the spline on a dense grid.

    Ties on the dense grid resolve to the smallest theta.
    """
    if n_points < 4:
        raise ValueError("n_points must be >= 4 for a cubic spline")
    if not hi > lo:
        raise ValueError("need lo < hi")
    grid = np.linspace(lo, hi, n_points)
    samples = []
    for i, t in enumerate(grid):
        try:
            samples.append(_as_estimate(objective(float(t))))
        except Exception as exc:
            raise ObjectiveError(f"objective failed at grid index {i} (theta={t:.6g}): {exc}") from exc
    y = np.array([s.value for s in samples])
    spline = CubicSpline(grid, y, bc_type="natural")
    dense = np.linspace(lo, hi, dense_points)
    vals = spline(dense)
    k = int(np.argmin(vals))
    return SweepResult(float(dense[k]), float(vals[k]), grid, tuple(samples), spline)


DFO_METHODS = ("nelder-mead", "cobyla")


def minimize_dfo(
    objective: Callable[[np.ndarray], EnergyEstimate | float],
    theta0: Sequence[float],
    max_iter: int = 200,
    method: str = "nelder-mead",
    step: float = 0.5,
    tol: float = 1e-10,
) -> VqeTrace:
    """Derivative-free minimization recording every evaluation.

    ``nelder-mead`` is scipy's adaptive simplex started from an axis-aligned
    simplex of size ``step``; ``cobyla`` is scipy's COBYLA with initial trust
    radius ``step``. ``max_iter`` bounds optimizer iterations (COBYLA counts
    function evaluations). The trace ends with a copy of the best-seen entry
    flagged as the optimum.
    """
    method = method.lower()
    if method not in DFO_METHODS:
        raise ValueError(f"unknown optimizer {method!r}; choose from {DFO_METHODS}")
    x0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("theta0 must be a non-empty vector")
    if max_iter < 0:
        raise ValueError("max_iter must be >= 0")
    trace = VqeTrace(method=method)
    seen: dict[tuple, float] = {}

    def f(x) -> float:
        key = tuple(float(v) for v in x)
        if key not in seen:
            try:
                est = _as_estimate(objective(np.array(key)))
            except Exception as exc:
                raise ObjectiveError(
                    f"objective failed at evaluation {len(trace)} (theta={list(key)}): {exc}"
                ) from exc
            trace.record(key, est)
            seen[key] = est.value
        return seen[key]

    f(x0)
    if max_iter == 0:
        trace.hit_max_iter = True
        trace.message = "max_iter = 0"
        trace.finalize()
        return trace

    if method == "nelder-mead":
        simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(x0.size)])
        res = optimize.minimize(
            f, x0, method="Nelder-Mead",
            options={"maxiter": max_iter, "initial_simplex": simplex, "adaptive": True,
                     "xatol": tol, "fatol": tol},
        )
    else:
        res = optimize.minimize(
            f, x0, method="COBYLA",
            options={"maxiter": max_iter, "rhobeg": step, "tol": tol},
        )
    trace.hit_max_iter = not res.success
    trace.n_iterations = int(getattr(res, "nit", res.nfev))
    trace.message = str(res.message)
    trace.finalize()
    return trace


# ---------------------------------------------------------------------------
# ansatz and mitigation wiring


ANSATZ_NAMES = ("ucc-1", "ucc-3", "hwe", "uccsd-trotter")


def build_ansatz(name: str, n_qubits: int, n_electrons: int, depth: int = 1) -> Circuit:
    """Symbolic trial circuit, including the Hartree-Fock preparation for UCC forms."""
    if name not in ANSATZ_NAMES:
        raise ValueError(f"unknown ansatz {name!r}; choose from {ANSATZ_NAMES}")
    if name == "hwe":
        return build_hwe(n_qubits, depth)
    hf = hartree_fock_reference(n_qubits, n_electrons)
    if name == "uccsd-trotter":
        return hf + build_uccsd_trotter(n_qubits, n_electrons)
    if (n_qubits, n_electrons) != (4, 2):
        raise ValueError(f"{name} is defined for 4 qubits and 2 electrons, got {n_qubits}, {n_electrons}")
    return hf + (build_ucc1() if name == "ucc-1" else build_ucc3())


@dataclass(frozen=True)
class Mitigation:
    readout: bool = False
    extrapolation: bool = False
    rdm: bool = False
    order: int = 2
    factors: tuple[int, ...] = (1, 3, 5)

    def validate(self) -> None:
        if self.rdm and self.extrapolation:
            raise ValueError("rdm purification cannot be combined with extrapolation")
        if self.extrapolation:
            if any(r < 1 or r % 2 == 0 for r in self.factors):
                raise ValueError(f"CNOT factors must be odd and >= 1, got {self.factors}")
            if len(set(self.factors)) < self.order + 1:
                raise ValueError(f"order {self.order} needs {self.order + 1} distinct factors")

    @property
    def label(self) -> str:
        parts = [n for n, on in (("ro", self.readout), ("re", self.extrapolation), ("rdm", self.rdm)) if on]
        return "+".join(parts) or "none"


def _child_seed(seed, *keys):
    if seed is None:
        return None
    return np.random.SeedSequence([int(seed), *keys])


def make_energy_function(
    h: PauliSum,
    shots: int,
    noise: NoiseModel,
    seed,
    readout_cal: ReadoutCal | None = None,
    rdm_integrals: IntegralSet | None = None,
    purify: bool = True,
):
    """``(circuit, params, seed) -> EnergyEstimate`` without extrapolation."""

    def energy(c: Circuit, params, s) -> EnergyEstimate:
        if rdm_integrals is None:
            return measure_pauli_sum(c, h, shots, noise, s, params, readout_cal)
        state = run(c, noise, params)
        raw = measure_rdm2(c, c.n_qubits, shots, noise, s, params,
                           rdm_integrals.n_electrons, readout_cal, state)
        flags = ["rdm"]
        extra = {"raw": energy_from_rdm(rdm_integrals, raw)}
        rdm = raw
        if purify:
            rdm = mcweeny_purify(raw)
            flags.append("purified" if rdm.info["converged"] else "purification-not-converged")
            extra["purification_iterations"] = rdm.info["iterations"]
        value = energy_from_rdm(rdm_integrals, rdm)
        return EnergyEstimate(value, 0.0, shots, None, len(h.non_identity()), tuple(flags), extra)

    return energy


def extrapolated_energy(energy, c: Circuit, params, seed, mitigation: Mitigation,
                        repeats: int = 1) -> tuple[EnergyEstimate, ExtrapolationFit]:
    """Measure at each CNOT factor (``repeats`` times) and fit to ``r = 0``."""
    points = []
    for r in mitigation.factors:
        cr = insert_cnot_pairs(c, r)
        for k in range(repeats):
            e = energy(cr, params, _child_seed(seed, r, k))
            points.append((r, e.value, e.stderr))
    unit = any(p[2] <= 0 for p in points)
    fit_pts = [(r, v, 1.0) for r, v, _ in points] if unit else points
    fit = richardson_extrapolate(fit_pts, mitigation.order)
    sigma = 0.0 if unit else fit.intercept_sigma
    flags = ("extrapolated", f"order={mitigation.order}") + (("unit-weights",) if unit else ())
    est = EnergyEstimate(fit.intercept, sigma, 0, None, 0, flags, {"points": points})
    return est, fit


@dataclass
class VqeResult:
    trace: VqeTrace
    estimate: EnergyEstimate
    theta: tuple[float, ...]
    ansatz: Circuit
    mitigation: Mitigation
    readout_cal: ReadoutCal | None = None
    sweep: SweepResult | None = None
    evaluations: int = 0

    @property
    def energy(self) -> float:
        return self.estimate.value


def vqe_run(
    h: PauliSum,
    ansatz: Circuit,
    optimizer: str = "nelder-mead",
    shots: int = 0,
    noise: NoiseModel = NOISELESS,
    mitigation: Mitigation | None = None,
    seed: int | None = 0,
    theta0: Sequence[float] | None = None,
    max_iter: int = 200,
    integrals: IntegralSet | None = None,
    readout_cal: ReadoutCal | None = None,
    calibration_shots: int | None = None,
    sweep_points: int = 25,
    step: float = 0.5,
) -> VqeResult:
    """Optimize ``<H>`` over the ansatz parameters.

    Args:
        h: qubit Hamiltonian on ``ansatz.n_qubits`` qubits.
        ansatz: symbolic circuit; parameters are optimized in declared order.
        optimizer: ``sweep`` (one parameter only), ``nelder-mead`` or ``cobyla``.
        shots: shots per Pauli string; 0 is the exact-expectation path.
        mitigation: readout / extrapolation / rdm flags.
        seed: base seed; every evaluation reuses it, so the objective is a
            deterministic function of theta.
        integrals: active-space integrals, required with the rdm flag.
        readout_cal: calibration to use; measured from the noise model when
            the readout flag is set and none is given.
    """
    mitigation = mitigation or Mitigation()
    mitigation.validate()
    if h.n_qubits != ansatz.n_qubits:
        raise ValueError(f"Hamiltonian has {h.n_qubits} qubits, ansatz has {ansatz.n_qubits}")
    if mitigation.rdm and integrals is None:
        raise ValueError("rdm mitigation needs the active-space integrals")
    if mitigation.rdm and integrals.n_spin_orbitals != ansatz.n_qubits:
        raise ValueError("rdm mitigation needs an untapered Jordan-Wigner register")
    n_par = ansatz.n_parameters
    if n_par == 0:
        raise ValueError("ansatz has no free parameters")

    cal = None
    if mitigation.readout:
        if readout_cal is not None:
            cal = readout_cal
        elif shots > 0:
            cal = calibrate_readout(ansatz.n_qubits, calibration_shots or shots, noise,
                                    _child_seed(seed, 0xCA1) if seed is not None else None)
        else:
            cal = ReadoutCal.from_noise(noise, ansatz.n_qubits)

    energy = make_energy_function(h, shots, noise, seed, cal, integrals if mitigation.rdm else None)

    def evaluate(theta) -> EnergyEstimate:
        params = [float(t) for t in np.atleast_1d(theta)]
        if mitigation.extrapolation:
            est, _ = extrapolated_energy(energy, ansatz, params, seed, mitigation)
        else:
            est = energy(ansatz, params, seed)
        return replace(est, shots=shots, seed=seed, flags=tuple(est.flags) + (mitigation.label,))

    objective = CachedObjective(evaluate, seed)
    sweep = None
    if optimizer == "sweep":
        if n_par != 1:
            raise ValueError(f"sweep optimizer needs exactly one parameter, ansatz has {n_par}")
        sweep = sweep_minimize(lambda t: objective([t]), n_points=sweep_points)
        trace = VqeTrace(method="sweep")
        for t, s in zip(sweep.thetas, sweep.samples):
            trace.record([t], s)
        trace.record([sweep.theta], objective([sweep.theta]))
        trace.finalize()
        trace.message = f"spline minimum {sweep.energy:.10f}"
    else:
        x0 = np.zeros(n_par) if theta0 is None else np.asarray(theta0, dtype=float)
        if x0.shape != (n_par,):
            raise ValueError(f"theta0 must have {n_par} entries")
        trace = minimize_dfo(objective, x0, max_iter, optimizer, step)
    best = trace.optimum
    return VqeResult(trace, best.estimate, best.theta, ansatz, mitigation, cal, sweep, objective.calls)


__all__ = [
    "ANSATZ_NAMES",
    "CachedObjective",
    "DFO_METHODS",
    "EnergyEstimate",
    "Mitigation",
    "ObjectiveError",
    "SweepResult",
    "TraceEntry",
    "VqeResult",
    "VqeTrace",
    "build_ansatz",
    "exact_ground_energy",
    "extrapolated_energy",
    "make_energy_function",
    "minimize_dfo",
    "sweep_minimize",
    "vqe_run",
]
