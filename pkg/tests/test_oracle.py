import math

import numpy as np
import pytest

from heraldix.errors import StructuralError, TractabilityError
from heraldix.heralding import (HeraldingProjector, SchemeConfig, ideal_output,
                                projector_coefficients, projector_coefficients_nq)
from heraldix.network import UnitaryMatrix
from heraldix.oracle import (OracleReport, brute_force_output, brute_force_projector, compare,
                             evolve)
from heraldix.verification import random_config, random_qubit_state, run_oracle_suite


def test_identity_network_by_hand():
    s = 1 / math.sqrt(2)
    cfg = SchemeConfig(2, 0, 2, 3, UnitaryMatrix.identity(3), ((s, s),) * 2, ((0.6, 0.8), (0.28, 0.96)))
    d = brute_force_projector(cfg)
    assert abs(d["00"] - 0.6 * 0.28) < 1e-15
    assert abs(d["01"] - 0.6 * 0.96) < 1e-15
    assert abs(d["10"] - 0.28 * 0.8) < 1e-15
    assert abs(d["11"] - 0.8 * 0.96) < 1e-15


def test_reference_config_agrees(reference):
    cfg, _ = reference
    assert compare(projector_coefficients(cfg), brute_force_projector(cfg)).max_abs_deviation < 1e-10


def test_evolve_two_photon_interference():
    s = 1 / math.sqrt(2)
    bs = np.array([[s, s], [-s, s]])
    out = evolve({(1, 1): 1.0}, bs, [0, 1])
    assert abs(out.get((1, 1), 0)) < 1e-15
    assert abs(abs(out[(2, 0)]) - s) < 1e-15


@pytest.mark.parametrize("shape", [(2, 0, 2, 3), (3, 0, 3, 6), (2, 1, 3, 4)])
def test_full_simulation_matches_closed_forms(shape, rng):
    for _ in range(3):
        cfg = random_config(shape, rng)
        state = random_qubit_state(shape[0], rng)
        brute = brute_force_output(cfg, state)
        assert brute.allclose(ideal_output(cfg, state), 1e-12)
        assert brute.max_occupation() <= 1


def test_bunched_terms_agree(rng):
    cfg = random_config((2, 0, 2, 3), rng)
    closed, brute = projector_coefficients(cfg), brute_force_projector(cfg)
    assert set(closed.extra_terms) == set(brute.extra_terms)
    rep = compare(closed, brute)
    assert rep.deviations["02"] < 1e-12 and rep.deviations["20"] < 1e-12


def test_photon_bound():
    cfg = SchemeConfig(2, 7, 9, 9, UnitaryMatrix.identity(9), ((1, 0),) * 2, ((1, 0),) * 9)
    with pytest.raises(TractabilityError):
        brute_force_projector(cfg)


def test_compare_requires_same_keys():
    a = HeraldingProjector(1, {(0,): 1, (1,): 0})
    b = HeraldingProjector(2, {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0})
    with pytest.raises(StructuralError):
        compare(a, b)


def test_compare_ignores_global_phase(rng):
    cfg = random_config((2, 0, 2, 3), rng)
    d = projector_coefficients_nq(cfg, with_extra=False)
    rotated = HeraldingProjector(2, {k: v * 1j for k, v in d.coefficients.items()})
    assert compare(d, rotated).max_abs_deviation < 1e-15


def test_small_suite_and_report_json():
    rep = run_oracle_suite(seed=7, suite=(((2, 0, 2, 3), 5), ((2, 1, 3, 4), 2)))
    assert rep.max_abs_deviation < 1e-10
    assert rep.n_configs == 7
    assert all(v >= 0 for v in rep.deviations.values())
    assert OracleReport(**rep.to_json()).max_abs_deviation == rep.max_abs_deviation
