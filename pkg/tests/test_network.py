import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraldix.errors import ConstraintError, DimensionError
from heraldix.fixtures import appendix_d_printed_matrix
from heraldix.fock import StateVector
from heraldix.network import (ActiveSubmatrix, ReckParameters, UnitaryMatrix, apply_network,
                              beam_splitter_unitary, permanent, permanent_naive, random_unitary,
                              reck_compose, reck_decompose, reck_matrix)


def test_unitary_validation():
    with pytest.raises(ConstraintError):
        UnitaryMatrix([[1, 1], [0, 1]])
    with pytest.raises(DimensionError):
        UnitaryMatrix([[1, 0, 0]])


def test_small_permanents():
    u = np.array([[0.3 + 0.1j, 2], [0.5, -1j]])
    assert permanent(u, [0], [0]) == u[0, 0]
    assert permanent(u, [0, 1], [0, 1]) == u[0, 0] * u[1, 1] + u[0, 1] * u[1, 0]
    assert permanent(u, [], []) == 1


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_all_ones_permanent_is_factorial(k):
    assert abs(permanent(np.ones((k, k)), range(k), range(k)) - math.factorial(k)) < 1e-9


def test_permanent_allows_repeated_indices():
    u = np.array([[1.0, 2.0], [3.0, 4.0]])
    # two photons in column 0, both detected in row 1: 2! * u10^2
    assert permanent(u, [1, 1], [0, 0]) == 2 * 9


def test_active_submatrix_uses_local_indices(rng):
    u = random_unitary(4, rng)
    sub = ActiveSubmatrix(u, (0, 2), (1, 3))
    assert sub.shape == (2, 2)
    assert sub.P([0], [1]) == u.entries[0, 3]
    with pytest.raises(DimensionError):
        ActiveSubmatrix(u, (0, 0), (1, 2))


def test_identity_network_is_trivial():
    s = StateVector(3, {"101": 0.6, "020": 0.8})
    assert apply_network(UnitaryMatrix.identity(3), s).allclose(s)


def test_balanced_splitter_suppresses_coincidences():
    s = 1 / math.sqrt(2)
    out = apply_network(beam_splitter_unitary(s, s, (1, 0), 2), StateVector.basis("11"))
    assert abs(out["11"]) < 1e-15
    assert abs(abs(out["20"]) - s) < 1e-15 and abs(abs(out["02"]) - s) < 1e-15


def test_single_photon_reads_a_column(rng):
    u = random_unitary(2, rng)
    out = apply_network(u, StateVector.basis("10"))
    assert abs(out["10"] - u.entries[0, 0]) < 1e-15
    assert abs(out["01"] - u.entries[1, 0]) < 1e-15


def test_splitter_examples():
    assert np.allclose(beam_splitter_unitary(1, 0, (1, 0), 2).entries, np.eye(2))
    s = 1 / math.sqrt(2)
    out = apply_network(beam_splitter_unitary(s, s, (1, 0), 2), StateVector.basis("10"))
    assert out.allclose(StateVector(2, {"10": s, "01": s}))


def test_pickoff_splitters_give_product_form():
    t1, r1, t2, r2 = 0.6, 0.8, 0.28, 0.96
    # modes: principal 1, principal 2, tap 1, tap 2
    u = beam_splitter_unitary(t1, r1, (2, 0), 4).entries @ beam_splitter_unitary(t2, r2, (3, 1), 4).entries
    out = apply_network(UnitaryMatrix(u), StateVector.basis("1100"))
    assert abs(out["1100"] - t1 * t2) < 1e-15
    assert abs(out["0011"] - r1 * r2) < 1e-15
    assert abs(out["1001"] - t1 * r2) < 1e-15


def test_apply_network_preserves_norm(rng):
    u = random_unitary(4, rng)
    s = StateVector(4, {"1100": 0.6, "0201": 0.8j})
    assert abs(apply_network(u, s).norm() - 1) < 1e-12


def test_reck_identity_and_single_plane():
    p = reck_decompose(UnitaryMatrix.identity(4))
    assert all(a == (0.0, 0.0) for a in p.angles) and not any(p.output_phases)
    assert np.allclose(reck_compose(ReckParameters(3, ((0, 0),) * 3, (0, 0, 0))).entries, np.eye(3))
    bs = reck_matrix(2, [math.pi / 4, 0, 0, 0])
    assert np.allclose(np.abs(bs), 1 / math.sqrt(2))


@pytest.mark.parametrize("dim", [2, 3, 6])
def test_reck_round_trip(dim, rng):
    for _ in range(5):
        u = random_unitary(dim, rng)
        back = reck_compose(reck_decompose(u))
        assert np.max(np.abs(back.entries - u.entries)) < 1e-9


def test_reck_on_printed_reference_matrix():
    printed = appendix_d_printed_matrix()
    back = reck_compose(reck_decompose(UnitaryMatrix.nearest(printed)))
    assert np.max(np.abs(back.entries - printed)) < 1e-3


def test_reck_vector_round_trip(rng):
    p = reck_decompose(random_unitary(4, rng))
    assert ReckParameters.from_vector(4, p.to_vector()) == p


def test_unitary_json_round_trip(rng):
    u = random_unitary(3, rng)
    assert np.array_equal(UnitaryMatrix.from_json(u.to_json()).entries, u.entries)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_ryser_matches_naive_and_is_permutation_symmetric(k, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(k, k)) + 1j * r.normal(size=(k, k))
    ref = permanent_naive(m)
    assert abs(permanent(m, range(k), range(k)) - ref) < 1e-12 * max(1.0, abs(ref))
    rows = list(r.permutation(k))
    cols = list(r.permutation(k))
    assert permanent(m, rows, cols) == permanent(m[np.ix_(rows, cols)], range(k), range(k))


def test_naive_permanent_definition():
    m = np.arange(9).reshape(3, 3).astype(complex)
    brute = sum(np.prod([m[i, p[i]] for i in range(3)]) for p in permutations(range(3)))
    assert permanent_naive(m) == brute
