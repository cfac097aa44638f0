"""Pauli-operator algebra, Jordan-Wigner mapping and Z2 tapering."""

from .jordan_wigner import jordan_wigner, jordan_wigner_ladder
from .operators import (
    MAX_DENSE_QUBITS,
    MERGE_TOL,
    DenseSizeError,
    PauliSum,
    PauliTerm,
    expectation_from_counts,
    format_pauli_sum,
    merge,
    parse_pauli_sum,
    pauli_matrix,
    pauli_sparse_matrix,
)
from .tapering import (
    TaperingResult,
    TaperingSectorError,
    sector_projector,
    symmetry_generators,
    taper_z2,
)

__all__ = [
    "DenseSizeError",
    "MAX_DENSE_QUBITS",
    "MERGE_TOL",
    "PauliSum",
    "PauliTerm",
    "TaperingResult",
    "TaperingSectorError",
    "expectation_from_counts",
    "format_pauli_sum",
    "jordan_wigner",
    "jordan_wigner_ladder",
    "merge",
    "parse_pauli_sum",
    "pauli_matrix",
    "pauli_sparse_matrix",
    "sector_projector",
    "symmetry_generators",
    "taper_z2",
]
