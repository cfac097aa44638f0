"""Variational quantum eigensolver chemistry benchmark on a noisy simulator."""

from .bench import BenchmarkConfig, BenchReport, dissociation_scan, emit_report, parse_ini, run_benchmark
from .circuit import Circuit, Gate, build_hwe, build_ucc1, build_ucc3
from .integrals import ActiveSpaceSpec, FermionOp, IntegralSet, freeze_core, load_integrals
from .mitigate import ReadoutCal, calibrate_readout, mcweeny_purify, richardson_extrapolate
from .pauli import PauliSum, PauliTerm, jordan_wigner, taper_z2
from .rdm import RDM2, energy_from_rdm
from .sim import EnergyEstimate, NoiseModel, QuantumState, measure_pauli_sum, measure_rdm2, run
from .vqe import exact_ground_energy, minimize_dfo, sweep_minimize, vqe_run

__version__ = "0.1.0"

__all__ = [
    "ActiveSpaceSpec",
    "BenchReport",
    "BenchmarkConfig",
    "Circuit",
    "EnergyEstimate",
    "FermionOp",
    "Gate",
    "IntegralSet",
    "NoiseModel",
    "PauliSum",
    "PauliTerm",
    "QuantumState",
    "RDM2",
    "ReadoutCal",
    "build_hwe",
    "build_ucc1",
    "build_ucc3",
    "calibrate_readout",
    "dissociation_scan",
    "emit_report",
    "energy_from_rdm",
    "exact_ground_energy",
    "freeze_core",
    "jordan_wigner",
    "load_integrals",
    "mcweeny_purify",
    "measure_pauli_sum",
    "measure_rdm2",
    "minimize_dfo",
    "parse_ini",
    "richardson_extrapolate",
    "run",
    "run_benchmark",
    "sweep_minimize",
    "taper_z2",
    "vqe_run",
]
