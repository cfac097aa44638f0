"""End-to-end acceptance criteria.

Each test prints one ``PASS``/``FAIL`` line and adds it to the terminal
summary before asserting.
"""

import math
import shutil
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

import conftest
from oracles import (
    fock_matrix,
    global_phase_distance,
    kron_string,
    random_spatial_integrals,
    sector_ground,
    sector_indices,
)
from vqebench.bench import load_manifest, parse_ini, prepare_hamiltonian
from vqebench.circuit import (
    build_hwe,
    build_ucc1,
    hartree_fock_bits,
    hartree_fock_reference,
    hwe_parameter_count,
    insert_cnot_pairs,
)
from vqebench.cli import main
from vqebench.integrals import (
    EXACT_CORE_FACTOR,
    ActiveSpaceSpec,
    build_fermion_hamiltonian,
    freeze_core,
    spatial_to_spin,
)
from vqebench.mitigate import (
    calibrate_readout,
    energy_from_rdm,
    mcweeny_purify,
    mcweeny_step,
    richardson_extrapolate,
)
from vqebench.pauli import expectation_from_counts, jordan_wigner, pauli_matrix, taper_z2
from vqebench.sim import (
    NoiseModel,
    apply_gates,
    circuit_unitary,
    measure_pauli_sum,
    measure_rdm2,
    measurement_basis_gates,
    pauli_string_expectation,
    run_statevector,
    sample_counts,
)
from vqebench.vqe import build_ansatz, exact_ground_energy, vqe_run

CHEMICAL_ACCURACY = 0.0016
YXXX = kron_string({0: "Y", 1: "X", 2: "X", 3: "X"}, 4)


def report(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def fixtures(data_dir):
    """H2 plus the four NaH active-space Hamiltonians: ``(label, integrals, qubit H)``."""
    out = []
    h2 = prepare_hamiltonian(parse_ini(data_dir / "h2.ini"))
    out.append(("H2", h2.active, h2.h_full))
    base = parse_ini(data_dir / "nah_scan.ini")
    for p in load_manifest(data_dir / "nah_scan.json"):
        prep = prepare_hamiltonian(replace(base, integrals=p.integrals))
        out.append((f"NaH R={p.r:.3f}", prep.active, prep.h_full))
    return out


def ucc3_optimum(h):
    res = vqe_run(h, build_ansatz("ucc-3", 4, 2), "nelder-mead", max_iter=400)
    return build_ansatz("ucc-3", 4, 2), list(res.theta), res.energy


def test_fci_recovery(h2_ham):
    t0 = time.perf_counter()
    res = vqe_run(h2_ham, build_ansatz("ucc-3", 4, 2), "nelder-mead", max_iter=200)
    elapsed = time.perf_counter() - t0
    fci = exact_ground_energy(h2_ham, 2)
    err = abs(res.energy - fci)
    ok = err < 1e-6 and res.trace.n_iterations <= 200 and elapsed < 10
    report("FCI recovery", ok, f"|E-E_FCI|={err:.2e}, iterations={res.trace.n_iterations}, {elapsed:.2f}s")


def test_uccd_bracket():
    c = build_ansatz("ucc-1", 4, 2)
    details = []
    ok = True
    for seed in range(5):
        ints, _ = conftest.random_two_electron(100 + seed)
        h = jordan_wigner(build_fermion_hamiltonian(ints), 4)

        def f(t):
            return measure_pauli_sum(c, h, 0, params=[t]).value

        # E(theta) is a sinusoid in 2 theta, so a grid plus a bounded refine is global
        grid = np.linspace(-math.pi, math.pi, 73)
        t0 = grid[int(np.argmin([f(t) for t in grid]))]
        e_ucc = minimize_scalar(f, bounds=(t0 - 0.1, t0 + 0.1), method="bounded",
                                options={"xatol": 1e-10}).fun
        e_fci = exact_ground_energy(h, 2)
        e_hf = f(0.0)
        good = e_fci - 1e-9 <= e_ucc <= e_hf + 1e-9
        ok &= good
        details.append(f"{e_ucc - e_fci:.1e}")
    report("UCCD bracket", ok, "E_ucc1-E_FCI per fixture " + ", ".join(details))


def test_circuit_correctness():
    thetas = np.random.default_rng(5).uniform(-2 * math.pi, 2 * math.pi, 32)
    worst = max(global_phase_distance(circuit_unitary(build_ucc1(t)), expm(1j * t * YXXX)) for t in thetas)
    counts_ok = all(
        build_hwe(n, d).n_parameters == hwe_parameter_count(n, d) == n * (3 * d + 2)
        for n in range(2, 7)
        for d in range(4)
    )
    ok = worst < 1e-10 and counts_ok and build_hwe(4, 1).n_parameters == 20
    report("circuit correctness", ok, f"max phase-aligned deviation {worst:.1e} over 32 angles, hwe counts {counts_ok}")


def _corrected_with_sigma(t, counts, cal, cal_shots):
    """Corrected value and its sigma from shot noise plus calibration error (delta method)."""
    val = cal.corrected_expectation(t, counts)
    raw = expectation_from_counts(t, counts)
    shot_var = (max(0.0, 1 - raw ** 2) / counts.shots) * cal.error_scale(t) ** 2
    cal_var = 0.0
    h = 1e-6
    for q in t.qubits:
        for which in ("p10", "p01"):
            p = getattr(cal, which)[q]
            bumped = getattr(cal, which).copy()
            bumped[q] = p + h
            other = cal.p01 if which == "p10" else cal.p10
            new = type(cal)(bumped, other) if which == "p10" else type(cal)(other, bumped)
            grad = (new.corrected_expectation(t, counts) - val) / h
            cal_var += grad ** 2 * max(p * (1 - p), 1.0 / cal_shots) / cal_shots
    return val, math.sqrt(shot_var + cal_var), raw, math.sqrt(max(0.0, 1 - raw ** 2) / counts.shots)


def test_readout_correction(h2_ham):
    t0 = time.perf_counter()
    shots = 100_000
    state = run_statevector(hartree_fock_reference(4, 2) + build_ucc1(-0.11306813035989))
    terms = h2_ham.non_identity()
    rng = np.random.default_rng(21)
    settings = {
        "random rates <= 0.1": NoiseModel(0.0, tuple(zip(rng.uniform(0, 0.1, 4), rng.uniform(0, 0.1, 4)))),
        "p = 0.1": NoiseModel.uniform(4, 0.0, 0.1, 0.1),
    }
    corrected_ok = True
    raw_failures = 0
    worst = 0.0
    for k, (name, noise) in enumerate(settings.items()):
        cal = calibrate_readout(4, shots, noise, seed=[k, 1])
        for i, t in enumerate(terms):
            exact = float(np.real(pauli_string_expectation(state, t)))
            counts = sample_counts(apply_gates(state, measurement_basis_gates(t)), shots, noise, seed=[k, 2, i])
            val, sigma, raw, raw_sigma = _corrected_with_sigma(t, counts, cal, shots)
            worst = max(worst, abs(val - exact) / sigma)
            corrected_ok &= abs(val - exact) < 3 * sigma
            if name == "p = 0.1":
                raw_failures += abs(raw - exact) >= 3 * raw_sigma
    elapsed = time.perf_counter() - t0
    ok = corrected_ok and raw_failures >= 1 and elapsed < 30
    report("readout correction", ok,
           f"worst corrected deviation {worst:.2f} sigma, {raw_failures} uncorrected terms outside 3 sigma, {elapsed:.1f}s")


def test_zero_noise_extrapolation(data_dir):
    t0 = time.perf_counter()
    noise = NoiseModel(0.01)
    ok = True
    details = []
    for label, _, h in fixtures(data_dir):
        c, theta, e0 = ucc3_optimum(h)
        pts = [(r, measure_pauli_sum(insert_cnot_pairs(c, r), h, 0, noise, params=theta).value, 1.0)
               for r in (1, 3, 5)]
        fit = richardson_extrapolate(pts, 2)
        raw_err = abs(pts[0][1] - e0)
        zne_err = abs(fit.intercept - e0)
        ok &= zne_err < raw_err
        details.append(f"{label} {zne_err:.1e}<{raw_err:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    report("zero-noise extrapolation", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_mcweeny_purification(h2_ints, h2_ham):
    c, theta, e_noiseless = ucc3_optimum(h2_ham)
    # (a) fixed point
    pure = measure_rdm2(c, 4, 0, params=theta)
    fixed_dev = float(np.abs(mcweeny_purify(pure).tensor - pure.tensor).max())
    # (b) eigenvalue law on random Hermitian pair matrices
    rng = np.random.default_rng(8)
    law_dev = 0.0
    for _ in range(5):
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        u, _ = np.linalg.qr(a)
        lam = rng.uniform(-0.2, 1.2, 6)
        x = (u * lam) @ u.conj().T
        got = np.sort(np.linalg.eigvalsh(mcweeny_step(x)))
        law_dev = max(law_dev, float(np.abs(got - np.sort(3 * lam ** 2 - 2 * lam ** 3)).max()))
    # (c) efficacy with shots at epsilon 0.05
    better = 0
    for seed in range(10):
        raw = measure_rdm2(c, 4, 8192, NoiseModel(0.05), seed=seed, params=theta)
        e_raw = energy_from_rdm(h2_ints, raw)
        e_pur = energy_from_rdm(h2_ints, mcweeny_purify(raw))
        better += abs(e_pur - e_noiseless) < abs(e_raw - e_noiseless)
    # and chemical accuracy of the purified exact-path energy at small epsilon
    low = {}
    for eps in (0.005, 0.01, 0.02):
        rdm = measure_rdm2(c, 4, 0, NoiseModel(eps), params=theta)
        low[eps] = abs(energy_from_rdm(h2_ints, mcweeny_purify(rdm)) - e_noiseless)
    ok = fixed_dev < 1e-12 and law_dev < 1e-12 and better >= 9 and max(low.values()) < CHEMICAL_ACCURACY
    report("McWeeny purification", ok,
           f"fixed point {fixed_dev:.1e}, eigenvalue law {law_dev:.1e}, purified better on {better}/10 seeds, "
           f"worst error at eps<=0.02 {max(low.values()):.1e}")


def test_frozen_core_equivalence():
    t0 = time.perf_counter()
    cases = [(3, 4, 31), (3, 4, 32), (4, 4, 33), (4, 6, 34), (4, 4, 35)]
    worst = 0.0
    for n_spatial, n_el, seed in cases:
        h, eri, enuc = random_spatial_integrals(n_spatial, np.random.default_rng(seed))
        ints = spatial_to_spin(h, eri, enuc, n_el)
        n = ints.n_spin_orbitals
        frozen = (0, n_spatial)
        active = tuple(p for p in range(n) if p not in frozen)
        ref = sector_ground(fock_matrix(h, eri, enuc), sector_indices(n, n_el, occupied=frozen))
        red = freeze_core(ints, ActiveSpaceSpec(frozen, active), core_factor=EXACT_CORE_FACTOR)
        got = exact_ground_energy(jordan_wigner(build_fermion_hamiltonian(red), red.n_spin_orbitals),
                                  red.n_electrons)
        worst = max(worst, abs(got - ref))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 60
    report("frozen-core equivalence", ok, f"max deviation {worst:.1e} on 5 sets of 6-8 spin orbitals, {elapsed:.1f}s")


def test_tapering_preserves_spectrum(data_dir):
    worst = 0.0
    removed = []
    for _, ints, h in fixtures(data_dir):
        n = h.n_qubits
        res = taper_z2(h, occupation_hint=hartree_fock_bits(n, ints.n_electrons))
        assert res.found
        removed.append(res.n_removed)
        e_sector = exact_ground_energy(h, ints.n_electrons)
        e_tapered = float(np.linalg.eigvalsh(pauli_matrix(res.reduced))[0])
        # the lowest tapered ground over every sector is the untapered ground
        e_all = min(
            float(np.linalg.eigvalsh(pauli_matrix(taper_z2(h, sector=s).reduced))[0])
            for s in np.array(np.meshgrid(*[[1, -1]] * res.n_removed)).T.reshape(-1, res.n_removed)
        )
        e_full = float(np.linalg.eigvalsh(pauli_matrix(h))[0])
        worst = max(worst, abs(e_tapered - e_sector), abs(e_all - e_full))
    report("tapering", worst < 1e-10, f"max ground-energy deviation {worst:.1e}, qubits removed {removed}")


def test_conditional_nah_reference(data_dir):
    cfg = parse_ini(data_dir / "nah.ini")
    if not cfg.integrals or not (data_dir / cfg.integrals).exists():
        conftest.ACCEPTANCE_LINES.append("SKIP  conditional NaH reference: no integral file")
        pytest.skip("NaH integrals not provided")
    fci = prepare_hamiltonian(cfg).fci
    err = abs(fci + 160.3034597)
    report("conditional NaH reference", err < 1e-4, f"E_FCI={fci:.7f}, deviation {err:.1e}")


def test_end_to_end_determinism(tmp_path, data_dir):
    for name in ("nah.ini", "nah_sto3g.fcidump"):
        shutil.copy(data_dir / name, tmp_path / name)
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["run", str(tmp_path / "nah.ini"), "--out", str(o)]) for o in outs]
    files = sorted(p.name for p in outs[0].iterdir())
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files)
    ok = codes == [0, 0] and same and {"report.json", "table.csv"} <= set(files)
    report("end-to-end determinism", ok, f"{len(files)} output files byte-identical={same}")
