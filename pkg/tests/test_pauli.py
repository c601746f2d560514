import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqa.drivers import build_transverse, build_xy_cycle
from cqa.pauli import (
    DimensionError,
    Hamiltonian,
    PauliTerm,
    commutator,
    commutator_norm,
    commutes,
    hermiticity_defect,
    ketbra,
    multiply,
    to_matrix,
    z_string,
)

from conftest import kron_hamiltonian, kron_label

LETTERS = "IXYZ"


def labels(n):
    return st.text(alphabet=LETTERS, min_size=n, max_size=n)


def test_multiply_xz_gives_minus_i_y():
    r = multiply(PauliTerm.from_label("X"), PauliTerm.from_label("Z"))
    assert r.label == "Y"
    assert r.coeff == -1j


def test_multiply_involution():
    r = multiply(PauliTerm.from_label("X"), PauliTerm.from_label("X"))
    assert r.label == "I" and r.coeff == 1


def test_multiply_disjoint_supports():
    r = multiply(PauliTerm.from_label("ZI"), PauliTerm.from_label("IZ"))
    assert r.label == "ZZ" and r.coeff == 1


def test_multiply_site_mismatch():
    with pytest.raises(ValueError):
        multiply(PauliTerm.from_label("X"), PauliTerm.from_label("XX"))


def test_masks_validated():
    with pytest.raises(ValueError):
        PauliTerm(2, 0b100, 0)


@pytest.mark.parametrize("a,b,expected", [("X", "Z", False), ("X", "X", True), ("ZZ", "XX", True), ("XY", "ZZ", True), ("XI", "YZ", False)])
def test_commutes_examples(a, b, expected):
    assert commutes(PauliTerm.from_label(a), PauliTerm.from_label(b)) is expected


def test_product_phase_exhaustive_two_sites():
    for a, b in itertools.product(map("".join, itertools.product(LETTERS, repeat=2)), repeat=2):
        p = multiply(PauliTerm.from_label(a), PauliTerm.from_label(b))
        np.testing.assert_allclose(p.coeff * kron_label(p.label), kron_label(a) @ kron_label(b), atol=1e-14)


@given(labels(3), labels(3))
def test_product_phase_three_sites(a, b):
    p = multiply(PauliTerm.from_label(a), PauliTerm.from_label(b))
    np.testing.assert_allclose(p.coeff * kron_label(p.label), kron_label(a) @ kron_label(b), atol=1e-14)


@given(labels(3), labels(3), labels(3))
def test_multiply_associative(a, b, c):
    A, B, C = (PauliTerm.from_label(x) for x in (a, b, c))
    l, r = multiply(multiply(A, B), C), multiply(A, multiply(B, C))
    assert l.key == r.key and l.coeff == r.coeff


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(labels(n), labels(n))))
def test_commutes_matches_commutator_norm(pair):
    a, b = pair
    ha, hb = Hamiltonian.from_labels({a: 1.0}), Hamiltonian.from_labels({b: 1.0})
    assert commutes(PauliTerm.from_label(a), PauliTerm.from_label(b)) == (commutator_norm(ha, hb) < 1e-12)


def test_to_matrix_single_site():
    np.testing.assert_array_equal(to_matrix(Hamiltonian.from_labels({"X": 1})), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(to_matrix(Hamiltonian.from_labels({"Z": 1})), [[1, 0], [0, -1]])


def test_to_matrix_xx_plus_yy():
    m = to_matrix(Hamiltonian.from_labels({"XX": 1, "YY": 1}))
    oracle = np.kron(kron_label("X"), kron_label("X")) + np.kron(kron_label("Y"), kron_label("Y"))
    np.testing.assert_allclose(m, oracle)
    expected = np.zeros((4, 4))
    expected[0b01, 0b10] = expected[0b10, 0b01] = 2
    np.testing.assert_allclose(m, expected)


@given(st.lists(st.tuples(labels(4), st.floats(-2, 2)), min_size=1, max_size=6))
def test_to_matrix_matches_kronecker_oracle_and_is_hermitian(items):
    h = Hamiltonian(4, [PauliTerm.from_label(l, c) for l, c in items])
    m = to_matrix(h)
    np.testing.assert_allclose(m, kron_hamiltonian(h), atol=1e-13)
    assert hermiticity_defect(m) < 1e-12


def test_apply_matches_matrix(rng):
    h = build_xy_cycle(range(5), 0.7) + z_string(5, [1, 3], 0.3) + Hamiltonian.from_labels({"YXZIY": 0.2})
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    np.testing.assert_allclose(h.apply(psi), to_matrix(h) @ psi, atol=1e-12)


def test_commutator_norm_x_z():
    assert commutator_norm(Hamiltonian.from_labels({"X": 1}), Hamiltonian.from_labels({"Z": 1})) == pytest.approx(2 * np.sqrt(2))


def test_commutator_norm_xy_ring_vs_magnetization():
    xy = build_xy_cycle(range(4), 1.0)
    mz = sum((z_string(4, [i]) for i in range(4)), Hamiltonian.zero(4))
    assert commutator_norm(xy, mz) < 1e-12
    dense = kron_hamiltonian(xy) @ kron_hamiltonian(mz) - kron_hamiltonian(mz) @ kron_hamiltonian(xy)
    assert np.linalg.norm(dense) < 1e-12


def test_commutator_norm_transverse_nonzero():
    mz = sum((z_string(3, [i]) for i in range(3)), Hamiltonian.zero(3))
    assert commutator_norm(build_transverse(3), mz) > 1


def test_commutator_algebraic_matches_matrix():
    a = Hamiltonian.from_labels({"XYZ": 1.0, "ZZI": 0.5})
    b = Hamiltonian.from_labels({"YIX": 1.0, "XXX": -0.3})
    np.testing.assert_allclose(to_matrix(commutator(a, b)), kron_hamiltonian(a) @ kron_hamiltonian(b) - kron_hamiltonian(b) @ kron_hamiltonian(a), atol=1e-13)


def test_terms_merge_and_drop():
    h = Hamiltonian(2, [PauliTerm.from_label("XX", 1.0), PauliTerm.from_label("XX", -1.0 + 1e-16), PauliTerm.from_label("ZI", 2)])
    assert len(h) == 1 and h.coeff("ZI") == 2


def test_ketbra_expansion():
    # |01><10| on sites (0, 1)
    h = ketbra(2, [0, 1], [0, 1], [1, 0])
    m = to_matrix(h)
    expected = np.zeros((4, 4))
    expected[0b10, 0b01] = 1
    np.testing.assert_allclose(m, expected, atol=1e-15)


def test_dimension_limit(monkeypatch):
    monkeypatch.setenv("CQA_MAX_DIM", "8")
    with pytest.raises(DimensionError):
        to_matrix(build_transverse(4))
    monkeypatch.setenv("CQA_MAX_DIM", "16")
    assert to_matrix(build_transverse(4)).shape == (16, 16)


def test_json_round_trip():
    h = build_xy_cycle(range(3), 0.5) + Hamiltonian.from_labels({"ZIY": 0.25})
    data = json.loads(json.dumps(h.to_json()))
    assert data["terms"][0].keys() == {"sites", "paulis", "coeff"}
    assert Hamiltonian.from_json(data) == h


def test_json_y_term_means_pauli_y():
    h = Hamiltonian.from_json({"n": 1, "terms": [{"sites": [0], "paulis": "Y", "coeff": [1, 0]}]})
    np.testing.assert_allclose(to_matrix(h), [[0, -1j], [1j, 0]])
