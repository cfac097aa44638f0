import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kron_string, operator_matrix, pauli_by_bits, sector_ground, sector_indices
from vqebench.integrals import FermionOp
from vqebench.pauli import (
    DenseSizeError,
    PauliSum,
    PauliTerm,
    TaperingSectorError,
    expectation_from_counts,
    format_pauli_sum,
    jordan_wigner,
    jordan_wigner_ladder,
    merge,
    parse_pauli_sum,
    pauli_matrix,
    pauli_sparse_matrix,
    sector_projector,
    symmetry_generators,
    taper_z2,
)

letters_st = st.dictionaries(st.integers(0, 3), st.sampled_from("XYZ"), max_size=4)
term_st = st.builds(
    PauliTerm,
    st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
    letters_st,
)


# --- terms and sums -------------------------------------------------------------


def test_term_canonical_forms():
    a = PauliTerm(1.0, "X3 Y1 Z0")
    b = PauliTerm(1.0, {0: "Z", 1: "Y", 3: "X", 2: "I"})
    c = PauliTerm(1.0, [(1, "y"), (3, "x"), (0, "z")])
    assert a == b == c
    assert a.letters == ((0, "Z"), (1, "Y"), (3, "X"))
    assert a.qubits == (0, 1, 3)
    assert a.label() == "Z0 Y1 X3"
    with pytest.raises(ValueError):
        PauliTerm(1.0, "X0 Z0")
    with pytest.raises(ValueError):
        PauliTerm(1.0, {0: "Q"})


def test_single_qubit_products():
    x, y, z = (PauliTerm(1.0, {0: l}) for l in "XYZ")
    assert x * y == PauliTerm(1j, {0: "Z"})
    assert y * x == PauliTerm(-1j, {0: "Z"})
    assert z * z == PauliTerm(1.0, {})
    assert y * z == PauliTerm(1j, {0: "X"})


@settings(max_examples=60, deadline=None)
@given(term_st, term_st)
def test_product_matches_matrices(a, b):
    lhs = pauli_matrix(a * b, 4)
    rhs = pauli_matrix(a, 4) @ pauli_matrix(b, 4)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    comm = np.abs(pauli_matrix(a, 4) @ pauli_matrix(b, 4) - pauli_matrix(b, 4) @ pauli_matrix(a, 4)).max()
    if abs(a.coefficient) > 1e-6 and abs(b.coefficient) > 1e-6:
        assert a.commutes_with(b) == (comm < 1e-9)


@settings(max_examples=40, deadline=None)
@given(letters_st)
def test_dense_paths_agree(letters):
    t = PauliTerm(1.0, letters)
    ref = kron_string(letters, 4)
    np.testing.assert_allclose(pauli_by_bits(letters, 4), ref, atol=1e-14)
    np.testing.assert_allclose(pauli_matrix(t, 4), ref, atol=1e-14)
    np.testing.assert_allclose(pauli_sparse_matrix(PauliSum([t], 4)).toarray(), ref, atol=1e-14)


def test_pauli_matrix_examples():
    np.testing.assert_array_equal(pauli_matrix(PauliTerm(1.0, {0: "Z"}), 1), np.diag([1, -1]))
    # qubit 0 is the most significant index
    zi = pauli_matrix(PauliTerm(1.0, {0: "Z"}), 2)
    np.testing.assert_array_equal(np.diag(zi).real, [1, 1, -1, -1])
    xx = pauli_matrix(PauliSum([PauliTerm(1.0, "X0 X1"), PauliTerm(1.0, "Z0 Z1")]), 2)
    assert np.linalg.eigvalsh(xx)[0] == pytest.approx(-2.0)
    assert pauli_matrix(PauliSum([PauliTerm(2.5, {})], 0)).shape == (1, 1)
    with pytest.raises(DenseSizeError):
        pauli_matrix(PauliSum([PauliTerm(1.0, {20: "Z"})]))


@settings(max_examples=30, deadline=None)
@given(st.lists(term_st, max_size=8), st.lists(term_st, max_size=8))
def test_sum_linearity_and_merge(a, b):
    sa, sb = PauliSum(a, 4), PauliSum(b, 4)
    np.testing.assert_allclose(
        pauli_matrix(sa + sb), pauli_matrix(sa) + pauli_matrix(sb), atol=1e-11
    )
    np.testing.assert_allclose(pauli_matrix(sa * sb), pauli_matrix(sa) @ pauli_matrix(sb), atol=1e-10)
    np.testing.assert_allclose(pauli_matrix(2.0 * sa), 2.0 * pauli_matrix(sa), atol=1e-11)
    # merging leaves at most one term per string
    keys = [t.letters for t in (sa + sb).terms]
    assert len(keys) == len(set(keys))
    np.testing.assert_allclose(pauli_matrix(merge(a + b, 4)), pauli_matrix(a + b, 4), atol=1e-11)


def test_merge_drops_cancelled_terms():
    s = PauliSum([PauliTerm(0.5, "X0"), PauliTerm(-0.5, "X0"), PauliTerm(1.0, "Z1")])
    assert [t.label() for t in s.terms] == ["Z1"]
    assert s.n_qubits == 2
    assert (s - s).terms == ()
    with pytest.raises(ValueError):
        PauliSum([PauliTerm(1.0, "Z3")], 2)


def test_serialization_round_trip():
    s = PauliSum([PauliTerm(-0.25, {}), PauliTerm(0.5, "X0 Y2"), PauliTerm(1e-3 + 2j, "Z1")], 4)
    text = format_pauli_sum(s)
    back = parse_pauli_sum(text)
    assert back == s
    assert back.n_qubits == 4
    with pytest.raises(ValueError, match="line 2"):
        parse_pauli_sum("1.0 X0\n0.5 Q1\n")


def test_hermiticity_checks():
    s = PauliSum([PauliTerm(1.0, "X0"), PauliTerm(0.5j, "Z0")])
    assert not s.is_hermitian()
    with pytest.raises(ValueError):
        s.real()
    assert (s + s.adjoint()).is_hermitian()


# --- Jordan-Wigner --------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ladder_operators_match_fock_space(n):
    for p in range(n):
        for create in (True, False):
            jw = pauli_matrix(jordan_wigner_ladder(p, create, n), n)
            ref = operator_matrix([(1.0, ((p, create),))], n)
            np.testing.assert_allclose(jw, ref, atol=1e-14)


def test_canonical_anticommutators():
    n = 3
    ops = {(p, c): pauli_matrix(jordan_wigner_ladder(p, c, n), n) for p in range(n) for c in (True, False)}
    eye = np.eye(2 ** n)
    for p, q in itertools.product(range(n), repeat=2):
        a_p, a_q_dag = ops[(p, False)], ops[(q, True)]
        np.testing.assert_allclose(a_p @ a_q_dag + a_q_dag @ a_p, eye * (p == q), atol=1e-14)
        np.testing.assert_allclose(ops[(p, False)] @ ops[(q, False)] + ops[(q, False)] @ ops[(p, False)], 0, atol=1e-14)


def test_number_operator_and_hopping():
    num = jordan_wigner(FermionOp.term(1.0, (2, True), (2, False)), 4)
    assert num == PauliSum([PauliTerm(0.5, {}), PauliTerm(-0.5, {2: "Z"})], 4)
    hop = FermionOp.term(1.0, (0, True), (2, False))
    hop_h = jordan_wigner(hop + hop.adjoint(), 4)
    assert hop_h == PauliSum([PauliTerm(0.5, "X0 Z1 X2"), PauliTerm(0.5, "Y0 Z1 Y2")], 4)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(-1, 1),
            st.lists(st.tuples(st.integers(0, 2), st.booleans()), min_size=1, max_size=4),
        ),
        min_size=1,
        max_size=5,
    )
)
def test_jordan_wigner_is_linear_and_exact(raw):
    op = FermionOp(tuple(raw))
    ref = operator_matrix(op.terms, 3)
    np.testing.assert_allclose(pauli_matrix(jordan_wigner(op, 3), 3), ref, atol=1e-12)


def test_jordan_wigner_rejects_out_of_range():
    with pytest.raises(IndexError):
        jordan_wigner(FermionOp.term(1.0, (4, True)), 4)


# --- counts ---------------------------------------------------------------------


def test_expectation_from_counts_examples():
    counts = {"00": 30, "01": 10, "10": 20, "11": 40}
    assert expectation_from_counts(PauliTerm(1.0, "Z0"), counts) == pytest.approx((40 - 60) / 100)
    assert expectation_from_counts(PauliTerm(1.0, "Z1"), counts) == pytest.approx((50 - 50) / 100)
    assert expectation_from_counts(PauliTerm(1.0, "Z0 Z1"), counts) == pytest.approx((70 - 30) / 100)
    # coefficient not applied; identity gives 1
    assert expectation_from_counts(PauliTerm(-3.0, {}), counts) == 1.0
    with pytest.raises(ValueError):
        expectation_from_counts(PauliTerm(1.0, "Z0"), {})


# --- tapering -------------------------------------------------------------------


def _sector_minimum(h: PauliSum, gens, sector) -> float:
    n = h.n_qubits
    proj = np.eye(2 ** n, dtype=complex)
    for g, s in zip(gens, sector):
        proj = proj @ (np.eye(2 ** n) + s * kron_string(dict(g.letters), n)) / 2
    w, v = np.linalg.eigh(proj)
    basis = v[:, w > 0.5]
    sub = basis.conj().T @ pauli_matrix(h) @ basis
    return float(np.linalg.eigvalsh(sub)[0])


def test_h2_tapering(h2_ham):
    res = taper_z2(h2_ham, occupation_hint="1010")
    assert res.found
    assert res.n_removed == len(res.symmetry_generators) >= 2
    assert all(all(l == "Z" for _, l in g.letters) for g in res.symmetry_generators)
    red = res.reduced
    assert red.n_qubits == 4 - res.n_removed
    e_red = np.linalg.eigvalsh(pauli_matrix(red))[0]
    assert e_red == pytest.approx(-1.13727017466, abs=1e-8)
    assert e_red == pytest.approx(_sector_minimum(h2_ham, res.symmetry_generators, res.sector), abs=1e-10)


def test_tapered_spectrum_is_sector_spectrum(h2_ham):
    res = taper_z2(h2_ham, occupation_hint="1010")
    n = h2_ham.n_qubits
    proj = pauli_matrix(sector_projector(res.symmetry_generators, res.sector, n))
    w, v = np.linalg.eigh(proj)
    basis = v[:, w > 0.5]
    full = np.linalg.eigvalsh(basis.conj().T @ pauli_matrix(h2_ham) @ basis)
    np.testing.assert_allclose(np.linalg.eigvalsh(pauli_matrix(res.reduced)), full, atol=1e-10)


def test_generators_commute_with_every_term(h2_ham):
    gens = symmetry_generators(h2_ham)
    assert gens
    for g in gens:
        assert all(g.commutes_with(t) for t in h2_ham.terms)
        assert all(g.commutes_with(o) for o in gens)


def test_tapering_without_hint_or_sector():
    h = PauliSum([PauliTerm(1.0, "Z0 Z1"), PauliTerm(0.5, "X0 X1")])
    with pytest.raises(TaperingSectorError):
        taper_z2(h)


def test_explicit_sector_uses_all_generators():
    h = PauliSum([PauliTerm(1.0, "Z0 Z1"), PauliTerm(0.5, "X0 X1")])
    gens = symmetry_generators(h)
    for sector in itertools.product((1, -1), repeat=len(gens)):
        res = taper_z2(h, sector=sector)
        got = np.linalg.eigvalsh(pauli_matrix(res.reduced))[0] if res.reduced.n_qubits else res.reduced.identity_coefficient().real
        assert got == pytest.approx(_sector_minimum(h, res.symmetry_generators, res.sector), abs=1e-10)


def test_no_symmetry_found():
    h = PauliSum([PauliTerm(1.0, "X0"), PauliTerm(1.0, "Z0")])
    res = taper_z2(h, occupation_hint="0")
    assert not res.found
    assert res.reduced is h


def test_bad_sector_length(h2_ham):
    with pytest.raises(TaperingSectorError):
        taper_z2(h2_ham, sector=(1,))
    with pytest.raises(ValueError):
        taper_z2(h2_ham, occupation_hint="101")


def test_sector_indices_oracle_consistency(h2_ham):
    # particle-number sector ground equals the tapered HF sector ground
    mat = pauli_matrix(h2_ham)
    e2 = sector_ground(mat, sector_indices(4, 2))
    res = taper_z2(h2_ham, occupation_hint="1010")
    assert np.linalg.eigvalsh(pauli_matrix(res.reduced))[0] == pytest.approx(e2, abs=1e-10)
