"""INI-driven benchmark runner, dissociation scans and report emission."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import re
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import parse_qs, urlsplit

import numpy as np

from .circuit import hartree_fock_bits, hartree_fock_reference, insert_cnot_pairs
from .integrals import (
    EXACT_CORE_FACTOR,
    ActiveSpaceSpec,
    IntegralSet,
    build_fermion_hamiltonian,
    freeze_core,
    load_integrals,
)
from .mitigate import richardson_extrapolate
from .pauli import PauliSum, jordan_wigner, taper_z2
from .sim import NoiseModel, measure_pauli_sum
from .vqe import (
    ANSATZ_NAMES,
    Mitigation,
    VqeResult,
    build_ansatz,
    exact_ground_energy,
    make_energy_function,
    vqe_run,
)

CHEMICAL_ACCURACY = 0.0016
TABLE_COLUMNS = ("Molecule", "Ansatz", "Z2 Tapering", "QPU/backend", "EM", "E")
EXTRA_COLUMNS = (
    "stderr", "E_FCI", "accuracy", "chemical_accuracy", "E_reference", "reference_minus_FCI",
    "n_qubits", "evaluations", "seed", "shots", "config_hash",
)
OPTIMIZERS = ("cobyla", "nelder-mead", "sweep")


class ConfigError(ValueError):
    """Invalid or incomplete benchmark configuration."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class UnknownKeyWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class BenchmarkConfig:
    integrals: str
    accelerator: str = "sim:statevector"
    backend: str = "statevector"
    epsilon: float = 0.0
    p10: float = 0.0
    p01: float = 0.0
    algorithm: str = "vqe"
    readout_error: bool = False
    richardson_extrapolation: bool = False
    rdm_purification: bool = False
    extrapolation_order: int = 2
    extrapolation_repeats: int = 2
    optimizer: str = "cobyla"
    max_iter: int = 200
    mode: str = "optimize"
    ansatz: str = "ucc-3"
    layers: int = 1
    initial_parameters: tuple[float, ...] | None = None
    basis: str = ""
    geometry: str = ""
    frozen: tuple[int, ...] = ()
    active: tuple[int, ...] = ()
    label: str = ""
    shots: int = 0
    calibration_shots: int = 0
    seed: int = 0
    taper: bool = False
    reference_energy: float | None = None
    core_factor: float = EXACT_CORE_FACTOR
    sweep_points: int = 25
    scan_repeats: int = 5

    @property
    def mitigation(self) -> Mitigation:
        return Mitigation(self.readout_error, self.richardson_extrapolation, self.rdm_purification,
                          order=self.extrapolation_order)

    def noise_model(self, n_qubits: int) -> NoiseModel:
        """Uniform readout flips on every qubit plus the CNOT channel."""
        return NoiseModel.uniform(n_qubits, self.epsilon, self.p10, self.p01)

    @property
    def molecule(self) -> str:
        return self.label or Path(self.integrals).stem

    def config_hash(self) -> str:
        d = asdict(self)
        # the path itself is machine-specific; hash the integral file content instead
        d["integrals"] = _file_digest(self.integrals)
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def validate(self) -> None:
        if self.algorithm != "vqe":
            raise ConfigError(f"unsupported algorithm {self.algorithm!r}")
        if self.ansatz not in ANSATZ_NAMES:
            raise ConfigError(f"unknown ansatz {self.ansatz!r}; choose from {', '.join(ANSATZ_NAMES)}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}; choose from {', '.join(OPTIMIZERS)}")
        if self.mode not in ("optimize", "sweep"):
            raise ConfigError(f"mode must be 'optimize' or 'sweep', got {self.mode!r}")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.backend == "statevector" and self.epsilon > 0:
            raise ConfigError("sim:statevector cannot carry gate noise; use sim:density")
        if self.shots < 0 or self.max_iter < 0 or self.layers < 0:
            raise ConfigError("shots, max-iter and layers must be non-negative")
        if self.extrapolation_repeats < 1 or self.scan_repeats < 1:
            raise ConfigError("repeat counts must be >= 1")
        try:
            self.mitigation.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.rdm_purification and self.taper:
            raise ConfigError("rdm-purification needs the untapered register")
        if self.taper and self.ansatz != "hwe":
            raise ConfigError(f"taper is supported with the hwe ansatz only, not {self.ansatz}")
        overlap = sorted(set(self.frozen) & set(self.active))
        if overlap:
            raise ConfigError(f"orbital {overlap[0]} is listed as both frozen and active")
        for name, lst in (("frozen", self.frozen), ("active", self.active)):
            if len(set(lst)) != len(lst):
                dup = next(i for i in lst if lst.count(i) > 1)
                raise ConfigError(f"orbital {dup} repeated in {name}-spin-orbitals")
            if any(i < 0 for i in lst):
                raise ConfigError(f"negative index in {name}-spin-orbitals")


def _file_digest(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        return f"missing:{Path(path).name}"


_KNOWN = {
    "XACC": {"accelerator", "algorithm"},
    "Error Mitigation": {"readout-error", "richardson-extrapolation", "rdm-purification"},
    "VQE": {"optimizer", "max-iter", "mode"},
    "Ansatz": {"name", "layers", "initial-parameters"},
    "Molecule": {"basis", "geometry", "frozen-spin-orbitals", "active-spin-orbitals"},
    "Extensions": {
        "integrals", "shots", "seed", "rdm-purification", "epsilon", "mode", "max-iter",
        "layers", "reference-energy", "label", "taper", "readout-p10", "readout-p01",
        "calibration-shots", "extrapolation-order", "extrapolation-repeats", "scan-repeats",
        "core-factor", "sweep-points",
    },
}


def _bool(s: str, key: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0", ""):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {s!r}")


def _number(s: str, key: str, kind=float):
    try:
        return kind(s.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {s!r}") from None


def parse_orbital_list(text: str, key: str = "orbital list") -> tuple[int, ...]:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ConfigError(f"{key}: expected a bracketed list, got {text!r}")
    inner = body[1:-1].strip()
    if not inner:
        return ()
    out = []
    for tok in re.split(r"\s*,\s*", inner):
        if not re.fullmatch(r"\d+", tok):
            raise ConfigError(f"{key}: malformed entry {tok!r}")
        out.append(int(tok))
    return tuple(out)


def _parse_accelerator(uri: str) -> tuple[str, dict]:
    parts = urlsplit(uri.strip())
    if parts.scheme != "sim":
        raise ConfigError(
            f"accelerator {uri!r} is not a simulator; use sim:statevector or sim:density?epsilon=..."
        )
    kind = parts.path
    if kind not in ("statevector", "density"):
        raise ConfigError(f"unknown simulator {kind!r}")
    query = {k: v[-1] for k, v in parse_qs(parts.query).items()}
    unknown = set(query) - {"epsilon", "p10", "p01"}
    if unknown:
        raise ConfigError(f"unknown accelerator options: {', '.join(sorted(unknown))}")
    return kind, query


def parse_ini(path, **overrides) -> BenchmarkConfig:
    """Read a benchmark file; relative integral paths resolve against its directory."""
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_parser(cp, path.parent, **overrides)


def parse_ini_string(text: str, base_dir=".", **overrides) -> BenchmarkConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return config_from_parser(cp, Path(base_dir), **overrides)


def config_from_parser(cp: configparser.ConfigParser, base_dir: Path, **overrides) -> BenchmarkConfig:
    for sec in ("XACC", "Ansatz", "Molecule"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing required section [{sec}]")
    for sec in cp.sections():
        if sec not in _KNOWN:
            warnings.warn(f"unknown section [{sec}] ignored", UnknownKeyWarning, stacklevel=3)
            continue
        for key in cp[sec]:
            if key not in _KNOWN[sec]:
                warnings.warn(f"unknown key {key!r} in [{sec}] ignored", UnknownKeyWarning, stacklevel=3)

    def get(sec, key, default=None):
        if cp.has_section(sec) and key in cp[sec]:
            return cp[sec][key]
        return default

    ext = "Extensions"
    kw: dict = {}
    if "accelerator" not in cp["XACC"]:
        raise ConfigError("[XACC] needs an accelerator")
    kw["accelerator"] = cp["XACC"]["accelerator"].strip()
    kind, query = _parse_accelerator(kw["accelerator"])
    kw["backend"] = kind
    kw["algorithm"] = get("XACC", "algorithm", "vqe").strip()

    eps_uri = query.get("epsilon")
    eps_ext = get(ext, "epsilon")
    if eps_uri is not None and eps_ext is not None and float(eps_uri) != float(eps_ext):
        raise ConfigError(f"epsilon given twice with different values ({eps_uri} vs {eps_ext})")
    eps = eps_uri if eps_uri is not None else eps_ext
    if eps is not None:
        kw["epsilon"] = _number(eps, "epsilon")
    for short, key in (("p10", "readout-p10"), ("p01", "readout-p01")):
        v = query.get(short, get(ext, key))
        if v is not None:
            kw[short] = _number(v, key)

    kw["readout_error"] = _bool(get("Error Mitigation", "readout-error", "false"), "readout-error")
    kw["richardson_extrapolation"] = _bool(
        get("Error Mitigation", "richardson-extrapolation", "false"), "richardson-extrapolation")
    rdm = get("Error Mitigation", "rdm-purification", get(ext, "rdm-purification", "false"))
    kw["rdm_purification"] = _bool(rdm, "rdm-purification")

    opt = get("VQE", "optimizer")
    if opt is not None:
        kw["optimizer"] = opt.strip().lower()
    for sec in ("VQE", ext):
        if get(sec, "max-iter") is not None:
            kw["max_iter"] = _number(get(sec, "max-iter"), "max-iter", int)
        if get(sec, "mode") is not None:
            kw["mode"] = get(sec, "mode").strip().lower()

    if "name" not in cp["Ansatz"]:
        raise ConfigError("[Ansatz] needs a name")
    kw["ansatz"] = cp["Ansatz"]["name"].strip().lower()
    for sec in ("Ansatz", ext):
        if get(sec, "layers") is not None:
            kw["layers"] = _number(get(sec, "layers"), "layers", int)
    if get("Ansatz", "initial-parameters") is not None:
        raw = get("Ansatz", "initial-parameters").strip().strip("[]")
        kw["initial_parameters"] = tuple(_number(t, "initial-parameters") for t in raw.split(",") if t.strip())

    mol = cp["Molecule"]
    kw["basis"] = mol.get("basis", "").strip()
    kw["geometry"] = " ".join(mol.get("geometry", "").strip().strip("'\"").split())
    if "frozen-spin-orbitals" in mol:
        kw["frozen"] = parse_orbital_list(mol["frozen-spin-orbitals"], "frozen-spin-orbitals")
    if "active-spin-orbitals" in mol:
        kw["active"] = parse_orbital_list(mol["active-spin-orbitals"], "active-spin-orbitals")

    ints = get(ext, "integrals")
    if ints is None:
        raise ConfigError("no integral file: set [Extensions] integrals")
    ip = Path(ints.strip())
    kw["integrals"] = str(ip if ip.is_absolute() else (base_dir / ip))
    for key, attr, kind in (
        ("shots", "shots", int), ("seed", "seed", int), ("calibration-shots", "calibration_shots", int),
        ("extrapolation-order", "extrapolation_order", int),
        ("extrapolation-repeats", "extrapolation_repeats", int), ("scan-repeats", "scan_repeats", int),
        ("core-factor", "core_factor", float), ("sweep-points", "sweep_points", int),
        ("reference-energy", "reference_energy", float),
    ):
        if get(ext, key) is not None:
            kw[attr] = _number(get(ext, key), key, kind)
    if get(ext, "label") is not None:
        kw["label"] = get(ext, "label").strip()
    if get(ext, "taper") is not None:
        kw["taper"] = _bool(get(ext, "taper"), "taper")

    kw.update({k: v for k, v in overrides.items() if v is not None})
    cfg = BenchmarkConfig(**kw)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# reports


@dataclass
class BenchRow:
    molecule: str
    ansatz: str
    taper: bool
    backend: str
    em: str
    energy: float
    stderr: float
    fci: float
    reference: float | None = None
    n_qubits: int = 0
    evaluations: int = 0
    seed: int | None = None
    shots: int = 0
    config_hash: str = ""
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return abs(self.energy - self.fci)

    @property
    def verdict(self) -> bool:
        return self.accuracy < CHEMICAL_ACCURACY

    @property
    def reference_diff(self) -> float | None:
        return None if self.reference is None else self.reference - self.fci

    def table_values(self) -> list:
        return [self.molecule, self.ansatz, "yes" if self.taper else "no", self.backend, self.em, self.energy]

    def extra_values(self) -> list:
        return [self.stderr, self.fci, self.accuracy, "PASS" if self.verdict else "FAIL",
                self.reference, self.reference_diff, self.n_qubits, self.evaluations,
                self.seed, self.shots, self.config_hash]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(accuracy=self.accuracy, chemical_accuracy=self.verdict, reference_minus_FCI=self.reference_diff)
        return d


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    traces: dict[str, list[dict]] = field(default_factory=dict)
    sweeps: dict[str, list[dict]] = field(default_factory=dict)
    extrapolations: dict[str, dict] = field(default_factory=dict)
    curve: list[dict] = field(default_factory=list)
    runtime: float = 0.0
    failures: list[dict] = field(default_factory=list)

    def merge(self, other: "BenchReport") -> None:
        self.rows += other.rows
        self.traces.update(other.traces)
        self.sweeps.update(other.sweeps)
        self.extrapolations.update(other.extrapolations)
        self.failures += other.failures
        self.runtime += other.runtime

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "chemical_accuracy_threshold": CHEMICAL_ACCURACY,
            "rows": [r.to_dict() for r in self.rows],
            "traces": self.traces,
            "sweeps": self.sweeps,
            "extrapolations": self.extrapolations,
            "curve": self.curve,
            "failures": self.failures,
        }
        if include_runtime:
            d["runtime_s"] = self.runtime
        return d


@dataclass
class Prepared:
    active: IntegralSet
    h_full: PauliSum
    h_run: PauliSum
    fci: float
    hf_energy: float
    tapered: bool
    n_qubits: int


def prepare_hamiltonian(cfg: BenchmarkConfig) -> Prepared:
    """load -> freeze_core -> Jordan-Wigner -> optional taper, plus the FCI oracle."""
    stage = "load"
    try:
        full = load_integrals(cfg.integrals)
        stage = "freeze_core"
        if cfg.frozen or cfg.active:
            active = cfg.active or tuple(i for i in range(full.n_spin_orbitals) if i not in cfg.frozen)
            ints = freeze_core(full, ActiveSpaceSpec(tuple(cfg.frozen), tuple(active)), cfg.core_factor)
        else:
            ints = full
        stage = "jordan_wigner"
        n = ints.n_spin_orbitals
        h = jordan_wigner(build_fermion_hamiltonian(ints), n)
        stage = "oracle"
        fci = exact_ground_energy(h, ints.n_electrons)
        hf = measure_pauli_sum(hartree_fock_reference(n, ints.n_electrons), h, 0).value
        stage = "taper"
        h_run, tapered = h, False
        if cfg.taper:
            res = taper_z2(h, occupation_hint=hartree_fock_bits(n, ints.n_electrons))
            h_run, tapered = res.reduced, res.found
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(stage, exc) from exc
    return Prepared(ints, h, h_run, fci, hf, tapered, h_run.n_qubits)


def run_benchmark(cfg: BenchmarkConfig) -> BenchReport:
    """Run one configuration end to end and return a one-row report."""
    t0 = time.perf_counter()
    prep = prepare_hamiltonian(cfg)
    key = _row_key(cfg)
    report = BenchReport()
    stage = "ansatz"
    try:
        ansatz = build_ansatz(cfg.ansatz, prep.n_qubits, prep.active.n_electrons, cfg.layers)
        stage = "optimize"
        optimizer = "sweep" if cfg.mode == "sweep" else cfg.optimizer
        if optimizer == "sweep" and ansatz.n_parameters != 1:
            raise ValueError(f"sweep mode needs a one-parameter ansatz, {cfg.ansatz} has {ansatz.n_parameters}")
        # optimize with readout correction / purification; extrapolation happens at the optimum
        opt_mit = Mitigation(cfg.readout_error, False, cfg.rdm_purification)
        noise = cfg.noise_model(prep.n_qubits)
        result: VqeResult = vqe_run(
            prep.h_run, ansatz, optimizer, cfg.shots, noise, opt_mit, cfg.seed,
            theta0=cfg.initial_parameters, max_iter=cfg.max_iter,
            integrals=prep.active if cfg.rdm_purification else None,
            calibration_shots=cfg.calibration_shots or None, sweep_points=cfg.sweep_points,
        )
        stage = "mitigate"
        energy, stderr, extra = _final_energy(cfg, prep, result)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    row = BenchRow(
        cfg.molecule, cfg.ansatz, prep.tapered, cfg.accelerator, cfg.mitigation.label,
        float(energy), float(stderr), prep.fci, cfg.reference_energy, prep.n_qubits,
        result.evaluations, cfg.seed, cfg.shots, cfg.config_hash(),
        extra={"theta": list(result.theta), "hf_energy": prep.hf_energy, **extra},
    )
    report.rows.append(row)
    report.traces[key] = [e.to_dict() for e in result.trace]
    if result.sweep is not None:
        x, y = result.sweep.curve(len(result.sweep.thetas))
        report.sweeps[key] = [
            {"theta": float(t), "energy": s.value, "stderr": s.stderr, "spline": float(v)}
            for t, s, v in zip(result.sweep.thetas, result.sweep.samples, result.sweep.spline(result.sweep.thetas))
        ]
    if "extrapolation" in extra:
        report.extrapolations[key] = extra["extrapolation"]
    report.runtime = time.perf_counter() - t0
    return report


def _row_key(cfg: BenchmarkConfig) -> str:
    return f"{cfg.molecule}/{cfg.ansatz}/{cfg.mitigation.label}/seed{cfg.seed}"


def _final_energy(cfg: BenchmarkConfig, prep: Prepared, result: VqeResult):
    """Energy reported for the row, re-measured at the optimum."""
    extra: dict = {}
    theta = list(result.theta)
    mit = cfg.mitigation
    energy_fn = make_energy_function(
        prep.h_run, cfg.shots, cfg.noise_model(prep.n_qubits), cfg.seed, result.readout_cal,
        prep.active if cfg.rdm_purification else None,
    )
    if mit.extrapolation:
        points = []
        for r in mit.factors:
            cr = insert_cnot_pairs(result.ansatz, r)
            for k in range(cfg.extrapolation_repeats):
                s = np.random.SeedSequence([cfg.seed, 0xE7, r, k])
                e = energy_fn(cr, theta, s)
                points.append((r, e.value, e.stderr))
        unit = any(p[2] <= 0 for p in points)
        fit_pts = [(r, v, 1.0) for r, v, _ in points] if unit else points
        fits = {}
        for name, order in (("linear", 1), ("quadratic", 2)):
            f = richardson_extrapolate(fit_pts, order)
            fits[name] = {"intercept": f.intercept, "sigma": 0.0 if unit else f.intercept_sigma,
                          "coefficients": list(f.coefficients)}
        extra["extrapolation"] = {
            "points": [{"r": r, "energy": v, "sigma": s} for r, v, s in points],
            "unit_weights": unit,
            **fits,
        }
        chosen = fits["linear" if mit.order == 1 else "quadratic"]
        return chosen["intercept"], chosen["sigma"], extra
    if cfg.shots > 0:
        # fresh shots at the optimum avoid the optimizer's selection bias
        e = energy_fn(result.ansatz, theta, np.random.SeedSequence([cfg.seed, 0xF1]))
    else:
        e = result.estimate
    if "raw" in e.extra:
        extra["unpurified"] = e.extra["raw"]
    return e.value, e.stderr, extra


# ---------------------------------------------------------------------------
# dissociation scans


@dataclass(frozen=True)
class ScanPoint:
    label: str
    r: float
    integrals: str


def load_manifest(path) -> list[ScanPoint]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scan manifest {path}: {exc}") from None
    pts = []
    for i, p in enumerate(data.get("points", [])):
        try:
            f = Path(p["integrals"])
            r = float(p["r"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"manifest entry {i} needs 'r' and 'integrals'") from None
        pts.append(ScanPoint(str(p.get("label", f"{r:g}")), r, str(f if f.is_absolute() else path.parent / f)))
    if not pts:
        raise ConfigError("scan manifest lists no points")
    return pts


def _scan_job(args):
    cfg, point, rep = args
    sub = replace(cfg, integrals=point.integrals, seed=cfg.seed + rep,
                  label=f"{cfg.molecule}@{point.label}")
    try:
        return point, rep, run_benchmark(sub), None
    except Exception as exc:
        return point, rep, None, f"{type(exc).__name__}: {exc}"


def dissociation_scan(
    cfg: BenchmarkConfig,
    points: Sequence[ScanPoint],
    n_repeats: int | None = None,
    workers: int = 1,
) -> BenchReport:
    """Benchmark every R ``n_repeats`` times (seeds ``seed, seed+1, ...``).

    Failures are recorded per point and the scan continues. The curve holds
    the mean energy and its sample standard error per R.
    """
    t0 = time.perf_counter()
    n_repeats = cfg.scan_repeats if n_repeats is None else n_repeats
    if n_repeats < 1:
        raise ConfigError("n_repeats must be >= 1")
    jobs = [(cfg, p, k) for p in points for k in range(n_repeats)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_scan_job, jobs))
    else:
        results = [_scan_job(j) for j in jobs]

    report = BenchReport()
    by_point: dict[ScanPoint, list] = {p: [] for p in points}
    for point, rep, sub, err in results:
        if err is not None:
            report.failures.append({"label": point.label, "r": point.r, "repeat": rep, "error": err})
            continue
        report.merge(sub)
        by_point[point].append(sub.rows[0])
    for p in points:
        rows = by_point[p]
        if not rows:
            continue
        e = np.array([r.energy for r in rows])
        sigma = float(e.std(ddof=1) / math.sqrt(len(e))) if len(e) > 1 else 0.0
        entry = {"label": p.label, "R": p.r, "E": float(e.mean()), "sigma": sigma,
                 "E_FCI": rows[0].fci, "n": len(rows)}
        raw = [r.extra["unpurified"] for r in rows if "unpurified" in r.extra]
        if raw:
            entry["E_unpurified"] = float(np.mean(raw))
        report.curve.append(entry)
    report.runtime = time.perf_counter() - t0
    return report


# ---------------------------------------------------------------------------
# emission


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def table_text(report: BenchReport) -> str:
    header = list(TABLE_COLUMNS) + ["stderr", "E_FCI", "|E-E_FCI|", "verdict", "seed"]
    body = []
    for r in report.rows:
        body.append([
            r.molecule, r.ansatz, "yes" if r.taper else "no", r.backend, r.em,
            f"{r.energy:.7f}", f"{r.stderr:.2e}", f"{r.fci:.7f}", f"{r.accuracy:.2e}",
            "PASS" if r.verdict else "FAIL", _fmt(r.seed),
        ])
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)] if body else [len(h) for h in header]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join(str(x).ljust(w) for x, w in zip(b, widths)).rstrip())
    for r in report.rows:
        if r.reference is not None:
            lines.append(f"{r.molecule}: reference {r.reference:.7f}, oracle {r.fci:.7f}, "
                         f"difference {r.reference_diff:+.2e}")
    lines.append(f"chemical accuracy threshold: {CHEMICAL_ACCURACY} Ha")
    return "\n".join(lines) + "\n"


def emit_report(report: BenchReport, out_dir, formats: Sequence[str] = ("json", "csv", "txt"),
                include_runtime: bool = False) -> list[Path]:
    """Write the report; outputs depend only on the report contents.

    ``csv`` also writes the plot-data files (sweep, trace, extrapolation and
    dissociation curve). Runtime is left out unless ``include_runtime``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bad = set(formats) - {"json", "csv", "txt"}
    if bad:
        raise ValueError(f"unknown formats: {', '.join(sorted(bad))}")
    written: list[Path] = []

    def put(name: str, text: str):
        p = out / name
        p.write_text(text, encoding="utf-8", newline="\n")
        written.append(p)

    if "json" in formats:
        put("report.json", json.dumps(report.to_dict(include_runtime), indent=2, sort_keys=True) + "\n")
    if "txt" in formats:
        put("table.txt", table_text(report))
    if "csv" in formats:
        put("table.csv", _csv_text(TABLE_COLUMNS + EXTRA_COLUMNS,
                                   (r.table_values() + r.extra_values() for r in report.rows)))
        put("sweep.csv", _csv_text(
            ("run", "theta", "energy", "stderr", "spline"),
            ([k, p["theta"], p["energy"], p["stderr"], p["spline"]]
             for k, pts in sorted(report.sweeps.items()) for p in pts)))
        put("trace.csv", _csv_text(
            ("run", "iteration", "energy", "stderr", "optimum", "theta"),
            ([k, e["iteration"], e["energy"], e["stderr"], e["optimum"], " ".join(repr(t) for t in e["theta"])]
             for k, es in sorted(report.traces.items()) for e in es)))
        ex_rows = []
        for k, ex in sorted(report.extrapolations.items()):
            for p in ex["points"]:
                ex_rows.append([k, "point", p["r"], p["energy"], p["sigma"]])
            for name in ("linear", "quadratic"):
                ex_rows.append([k, name, 0, ex[name]["intercept"], ex[name]["sigma"]])
        put("extrapolation.csv", _csv_text(("run", "kind", "r", "energy", "sigma"), ex_rows))
        put("curve.csv", _csv_text(
            ("R", "E", "sigma", "E_FCI", "E_unpurified", "n"),
            ([c["R"], c["E"], c["sigma"], c["E_FCI"], c.get("E_unpurified"), c["n"]] for c in report.curve)))
    return written


__all__ = [
    "CHEMICAL_ACCURACY",
    "TABLE_COLUMNS",
    "BenchReport",
    "BenchRow",
    "BenchmarkConfig",
    "ConfigError",
    "PipelineError",
    "ScanPoint",
    "UnknownKeyWarning",
    "dissociation_scan",
    "emit_report",
    "load_manifest",
    "parse_ini",
    "parse_ini_string",
    "parse_orbital_list",
    "prepare_hamiltonian",
    "run_benchmark",
    "table_text",
]
