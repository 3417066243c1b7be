import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chargecluster.errors import DomainError
from chargecluster.model import (
    IsingXModel,
    PauliTerm,
    all_pairs,
    build_chain,
    build_general,
    build_longrange,
    build_physical_chain,
    build_physical_common,
    combine_terms,
    nearest_neighbour,
    terms_from_json,
    terms_to_json,
    to_dense,
    x_basis_energy,
)
from chargecluster.params import ChargeQubitParams, CouplerParams, calibrate_chain, calibrate_common

G = 2 * math.pi * 0.8  # hbar*g = 0.8 GHz


def coeffs(terms):
    return {t.factors: t.coefficient for t in terms}


def symbolic_chain(n, hg):
    """Hand expansion of hbar*g sum (1 - x_i)(1 - x_{i+1})/4."""
    out = {(): 0.25 * hg * (n - 1)}
    for i in range(1, n):
        for key, c in (((i, "X"),), -1), (((i + 1, "X"),), -1), (((i, "X"), (i + 1, "X")), 1):
            out[key] = out.get(key, 0.0) + 0.25 * hg * c
    return out


def symbolic_longrange(n, hg):
    """Hand expansion of -hbar*g sum_{i<j} (1 + x_i)(1 + x_j)/4."""
    out = {(): -0.25 * hg * n * (n - 1) / 2}
    for i, j in itertools.combinations(range(1, n + 1), 2):
        for key in (((i, "X"),), ((j, "X"),), ((i, "X"), (j, "X"))):
            out[key] = out.get(key, 0.0) - 0.25 * hg
    return out


# --- PauliTerm


def test_pauli_term_normalises_and_validates():
    t = PauliTerm(2.0, {3: "x", 1: "Z"})
    assert t.factors == ((1, "Z"), (3, "X"))
    assert t.label == "Z1 X3"
    assert t.max_index() == 3
    with pytest.raises(DomainError):
        PauliTerm(1.0, {0: "X"})
    with pytest.raises(DomainError):
        PauliTerm(1.0, {1: "W"})
    with pytest.raises(DomainError):
        PauliTerm(math.nan, {1: "X"})


def test_term_json_round_trip():
    terms = [PauliTerm(0.5), PauliTerm(-1.25, {1: "X"}), PauliTerm(0.3, {1: "X", 4: "Z"})]
    assert terms_from_json(terms_to_json(terms)) == terms


def test_combine_terms():
    out = combine_terms([PauliTerm(1.0, {1: "X"}), PauliTerm(-1.0, {1: "X"}), PauliTerm(2.0, {2: "Z"})])
    assert out == [PauliTerm(2.0, {2: "Z"})]


def test_to_dense_single_qubit_ordering():
    h = to_dense([PauliTerm(1.0, {1: "Z"})], 2)
    np.testing.assert_allclose(np.diag(h).real, [1, 1, -1, -1])


# --- abstract models


def test_chain_two_qubits_expansion():
    hg = G / (2 * math.pi)
    got = coeffs(build_chain(2, G).terms())
    want = {(): 0.25 * hg, ((1, "X"),): -0.25 * hg, ((2, "X"),): -0.25 * hg, ((1, "X"), (2, "X")): 0.25 * hg}
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k], rel=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_chain_expansion_matches_symbolic(n):
    hg = G / (2 * math.pi)
    got, want = coeffs(build_chain(n, G).terms()), symbolic_chain(n, hg)
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k], rel=1e-14)
    # interior -hbar*g/2, ends -hbar*g/4, bonds +hbar*g/4
    assert got[((1, "X"),)] == pytest.approx(-0.25 * hg)
    if n > 2:
        assert got[((2, "X"),)] == pytest.approx(-0.5 * hg)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_longrange_expansion_matches_symbolic(n):
    hg = G / (2 * math.pi)
    got, want = coeffs(build_longrange(n, G).terms()), symbolic_longrange(n, hg)
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k], rel=1e-14)
    assert got[((1, "X"),)] == pytest.approx(-0.25 * hg * (n - 1))


def test_pair_counts():
    assert sum(len(t.factors) == 2 for t in build_longrange(4, G).terms()) == 6
    assert sum(len(t.factors) == 2 for t in build_longrange(2, G).terms()) == 1
    assert sum(len(t.factors) == 2 for t in build_general(3, G, all_pairs, "plus").terms()) == 3


def test_chain_constant():
    assert build_chain(3, G).constant == pytest.approx(0.5)


def test_single_qubit_general_model_has_no_pairs():
    m = build_general(1, G, nearest_neighbour)
    assert all(len(t.factors) < 2 for t in m.terms())
    np.testing.assert_allclose(m.x_energies(), 0.0)


@pytest.mark.parametrize("builder", [build_chain, build_longrange])
def test_builders_reject_single_qubit(builder):
    with pytest.raises(DomainError):
        builder(1, G)


def test_x_basis_energy_examples():
    hg = G / (2 * math.pi)
    assert x_basis_energy(build_chain(3, G), [1, 1, 1]) == 0.0
    assert x_basis_energy(build_chain(3, G), [-1, -1, -1]) == pytest.approx(2 * hg)
    assert x_basis_energy(build_longrange(4, G), [1, 1, 1, 1]) == pytest.approx(-6 * hg)
    with pytest.raises(DomainError):
        x_basis_energy(build_chain(3, G), [1, 0, 1])


@pytest.mark.parametrize("builder", [build_chain, build_longrange])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_x_energies_agree_with_dense_diagonal(builder, n):
    """The x-basis energies are the diagonal of H after a Hadamard on every qubit."""
    m = builder(n, G)
    h = to_dense(m.terms(), n)
    had = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    hn = had
    for _ in range(n - 1):
        hn = np.kron(hn, had)
    hx = hn @ h @ hn
    np.testing.assert_allclose(hx, np.diag(np.diag(hx)), atol=1e-12)
    np.testing.assert_allclose(np.diag(hx).real, m.hbar_g * m.x_energies(), atol=1e-12)


@given(st.integers(2, 8), st.data())
@settings(max_examples=30, deadline=None)
def test_energies_are_integer_multiples(n, data):
    builder = data.draw(st.sampled_from([build_chain, build_longrange]))
    e = builder(n, G).x_energies()
    np.testing.assert_allclose(e, np.round(e), atol=1e-12)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_closed_form_energies(n):
    """Chain: number of adjacent |+>|+> pairs. Long-range: -C(k, 2) with k the count of |->."""
    chain, lr = build_chain(n, G).x_energies(), build_longrange(n, G).x_energies()
    for idx in range(1 << n):
        bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        assert chain[idx] == sum(a * b for a, b in zip(bits, bits[1:]))
        k = bits.count(0)
        assert lr[idx] == -k * (k - 1) / 2


def test_constant_can_be_removed():
    m = IsingXModel(3, G, nearest_neighbour, "minus", includes_constant=False)
    assert not any(t.is_identity for t in m.terms())
    np.testing.assert_allclose(m.x_energies(), build_chain(3, G).x_energies() - 0.5)


def test_chunked_energies_match():
    m = build_longrange(7, G)
    np.testing.assert_array_equal(m.x_energies(chunk=5), m.x_energies())


# --- physical Hamiltonians


QUBIT = ChargeQubitParams(100.0, 10.0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_calibrated_chain_matches_ideal_up_to_constant(n):
    cal = calibrate_chain([QUBIT] * n, [CouplerParams.large_jj(50.0)] * (n - 1))
    phys = coeffs(build_physical_chain([QUBIT] * n, [CouplerParams.large_jj(50.0)] * (n - 1), cal))
    ideal = coeffs(build_chain(n, cal.achieved_g).terms())
    ideal.pop(())
    assert phys.keys() == ideal.keys()
    for k in ideal:
        assert phys[k] == pytest.approx(ideal[k], rel=1e-9)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_calibrated_common_matches_ideal_up_to_constant(n):
    c = CouplerParams.common_inductance(10.0)
    cal = calibrate_common([QUBIT] * n, c)
    phys = coeffs(build_physical_common([QUBIT] * n, c, cal))
    ideal = coeffs(build_longrange(n, cal.achieved_g).terms())
    ideal.pop(())
    assert phys.keys() == ideal.keys()
    for k in ideal:
        assert phys[k] == pytest.approx(ideal[k], rel=1e-9)


def test_physical_chain_off_degeneracy_has_z_terms():
    q = ChargeQubitParams(100.0, 10.0, n_g=0.0)
    terms = build_physical_chain([q, q], [CouplerParams.large_jj(50.0)])
    assert coeffs(terms)[((1, "Z"),)] == pytest.approx(-50.0)


def test_physical_chain_without_coupling_is_independent():
    terms = build_physical_chain([QUBIT, QUBIT], [CouplerParams.large_jj(50.0)])
    # zero flux makes the coupling vanish, so only single-qubit terms remain
    assert all(len(t.factors) == 1 for t in terms)
