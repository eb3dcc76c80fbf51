import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraldix.errors import DegenerateStateError, DimensionError
from heraldix.fock import (FockState, StateVector, ensemble_fidelity, fidelity, inner_product,
                           normalize, qubit_basis, tensor)
from heraldix.heralding import ideal_output
from heraldix.optimizer import TargetState


def test_fock_state_rejects_negative_and_empty():
    with pytest.raises(ValueError):
        FockState((0, -1))
    with pytest.raises(DimensionError):
        FockState(())


def test_inner_products_of_basis_states():
    assert inner_product(StateVector.basis("0"), StateVector.basis("0")) == 1
    assert inner_product(StateVector.basis("01"), StateVector.basis("10")) == 0


def test_cluster_state_has_unit_norm():
    cl = TargetState.cluster(math.pi).state_vector()
    assert abs(inner_product(cl, cl) - 1) < 1e-15


def test_inner_product_conjugates_left_argument():
    a = StateVector(1, {"1": 1j})
    b = StateVector(1, {"1": 1.0})
    assert inner_product(a, b) == -1j


def test_mode_mismatch_raises():
    with pytest.raises(DimensionError):
        inner_product(StateVector.basis("0"), StateVector.basis("00"))
    with pytest.raises(DimensionError):
        StateVector(2, {"1": 1.0})


def test_normalize_scales_and_fixes_phase():
    s, nrm = normalize(StateVector(2, {"00": 0.5}))
    assert nrm == 0.5 and s["00"] == 1
    s, nrm = normalize(StateVector(2, {"11": 1j}))
    assert nrm == 1.0 and s["11"] == 1


def test_normalize_zero_vector_raises():
    with pytest.raises(DegenerateStateError):
        normalize(StateVector.zero(2))


def test_reference_output_norm(reference):
    cfg, _ = reference
    _, nrm = normalize(ideal_output(cfg))
    assert abs(nrm ** 2 - 0.0885) < 5e-4


def test_fidelity_examples():
    s = StateVector(2, {"01": 0.6, "10": 0.8j})
    assert abs(fidelity(s, s) - 1) < 1e-15
    assert fidelity(StateVector.basis("00"), StateVector.basis("11")) == 0


def test_ensemble_fidelity_reduces_to_pure_fidelity():
    s = StateVector(2, {"00": 1, "11": 1})
    t = StateVector(2, {"00": 1})
    assert abs(ensemble_fidelity(t, [(0.3, s)]) - fidelity(t, s)) < 1e-15


def test_tensor_products():
    assert tensor(StateVector.basis("0"), StateVector.basis("1")) == StateVector.basis("01")
    t, r = 0.6, 0.8
    out = tensor(StateVector(1, {"0": t, "1": r}), StateVector.basis("0"))
    assert out.allclose(StateVector(2, {"00": t, "10": r}))


def test_pickoff_product_state_has_four_terms():
    t1, r1, t2, r2 = 0.6, 0.8, 0.28, 0.96
    a = StateVector(2, {"01": t1, "10": r1})
    b = StateVector(2, {"01": t2, "10": r2})
    out = tensor(a, b)
    assert len(out) == 4
    assert abs(out["0101"] - t1 * t2) < 1e-15 and abs(out["1010"] - r1 * r2) < 1e-15


def test_json_round_trip_is_lossless():
    s = StateVector(2, {"01": 1 / 3, "10": cmath.exp(0.1j) / 7})
    assert StateVector.from_json(s.to_json()) == s


def test_small_amplitudes_are_pruned():
    assert len(StateVector(1, {"0": 1e-16, "1": 1.0})) == 1


amp = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(amp, min_size=4, max_size=4))
def test_normalize_is_idempotent(values):
    s = StateVector(2, dict(zip(qubit_basis(2), values)))
    if s.norm() < 1e-6:
        return
    once, _ = normalize(s)
    twice, nrm = normalize(once)
    assert twice == once
    assert abs(nrm - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(amp, min_size=4, max_size=4), st.lists(amp, min_size=4, max_size=4))
def test_fidelity_is_bounded_and_symmetric(a_vals, b_vals):
    a = StateVector(2, dict(zip(qubit_basis(2), a_vals)))
    b = StateVector(2, dict(zip(qubit_basis(2), b_vals)))
    if a.norm() < 1e-6 or b.norm() < 1e-6:
        return
    f = fidelity(a, b)
    assert 0.0 <= f <= 1.0
    assert abs(f - fidelity(b, a)) < 1e-9


def test_qubit_basis_order():
    assert qubit_basis(2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(qubit_basis(4)) == 16
    assert np.all(np.diff([int("".join(map(str, b)), 2) for b in qubit_basis(3)]) == 1)
