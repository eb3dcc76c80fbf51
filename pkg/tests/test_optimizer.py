import cmath
import math

import numpy as np
import pytest

from heraldix.errors import ConfigurationError, InfeasibleError, NoCompletionError
from heraldix.fixtures import appendix_d_printed_matrix
from heraldix.fock import fidelity
from heraldix.heralding import ideal_output
from heraldix.network import unitarity_error
from heraldix.optimizer import (SIZE_OVERRIDES, Budget, OptimizationResult, TargetState,
                                min_unitary_size, optimize, phi_sweep,
                                regular_chain_2q_cluster, scheme_unitary_size,
                                sylvester_determinant, sylvester_residuals, sylvester_solve_2q,
                                unitary_completion)

FAST = Budget(restarts=8)


def test_target_constructors():
    cl = TargetState.cluster(math.pi)
    assert np.allclose(cl.as_array(), [0.5, 0.5, 0.5, -0.5])
    g = TargetState.ghz(0.0)
    assert abs(g.coefficients[(1, 1, 1)] - 1 / math.sqrt(2)) < 1e-15
    assert sum(abs(v) ** 2 for v in g.coefficients.values()) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        TargetState(2, {(0, 0): 1, (1, 1): 1})


def test_target_json_round_trip():
    t = TargetState.cluster(0.3, 1.1)
    back = TargetState.from_json(t.to_json())
    assert np.allclose(back.as_array(), t.as_array()) and back.family == "cluster"


def test_sizing_rule():
    assert min_unitary_size(1) == 0
    assert min_unitary_size(2) == 3
    assert min_unitary_size(3) == 7 and SIZE_OVERRIDES[3] == 6 and scheme_unitary_size(3) == 6
    assert min_unitary_size(4) == 15 and scheme_unitary_size(4) == 15


def _random_free(rng):
    u12, u22 = rng.normal(size=2) + 1j * rng.normal(size=2)
    a1, a2, t1, t2 = rng.uniform(0.1, 0.9, 4)
    p = 0.3 * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    return u12, u22, a1 * cmath.exp(0.4j), a2 * cmath.exp(0.4j), t1, t2, p


def test_sylvester_closed_forms_solve_both_equations(rng):
    target = TargetState.cluster(2.0)
    for _ in range(20):
        u12, u22, a1, a2, t1, t2, p = _random_free(rng)
        u21, u11 = sylvester_solve_2q(target, u12, u22, a1, a2, t1, t2, p)
        f1, f2 = sylvester_residuals(target, u11, u12, u21, u22, a1, a2, t1, t2, p)
        assert abs(f1) < 1e-10 and abs(f2) < 1e-10
        assert abs(sylvester_determinant(target, u12, u21, u22, a1, a2, t1, t2, p)) < 1e-10


def test_sylvester_with_vanishing_c00(rng):
    s = 1 / math.sqrt(3)
    target = TargetState(2, {(0, 1): s, (1, 0): s, (1, 1): s})
    u12, u22, a1, a2, t1, t2, p = _random_free(rng)
    u21, u11 = sylvester_solve_2q(target, u12, u22, a1, a2, t1, t2, p)
    assert abs(u11 * u22 + u12 * u21) < 1e-10


def test_sylvester_on_reference(reference):
    cfg, target = reference
    u = cfg.unitary.entries
    (a1, b1), (a2, b2) = cfg.qubit_projectors
    ph = cmath.exp(1j * cfg.theta)
    t1, t2 = cfg.pickoff[0][0].real, cfg.pickoff[1][0].real
    out = ideal_output(cfg)
    p = sum(target.coefficients[k.occupations].conjugate() * v for k, v in out.amplitudes.items())
    u21, u11 = sylvester_solve_2q(target, u[0, 1], u[1, 1], a1 * ph, a2 * ph, t1, t2, p, b1, b2)
    assert abs(u21 - u[1, 0]) < 5e-3 and abs(u11 - u[0, 0]) < 5e-3


def test_chain_satisfies_matching_relations(rng):
    for _ in range(20):
        phi = rng.uniform(0, math.pi)
        p12 = complex(*rng.uniform(-0.3, 0.3, 2))
        a1, a2, t1, t2 = rng.uniform(0.2, 0.8, 4)
        zeta = rng.uniform(-math.pi, math.pi)
        try:
            sol = regular_chain_2q_cluster(phi, 0.0, p12, a1, a2, t1, t2, zeta)
        except Exception:
            continue
        assert max(abs(r) for r in sol.matching_residuals()) < 1e-10
        assert sol.theta == phi - zeta
        rows = sol.rows
        assert abs(np.vdot(rows[1], rows[0])) < 1e-12
        assert abs(np.linalg.norm(rows[0]) - 1) < 1e-12


def test_reference_parameters_satisfy_chain(reference):
    cfg, _ = reference
    u = cfg.unitary.entries
    (a1, _), (a2, _) = cfg.qubit_projectors
    sol = regular_chain_2q_cluster(math.pi, 0.0, u[0, 1], a1.real, a2.real, 0.645, 0.645, 2.577)
    assert max(abs(r) for r in sol.matching_residuals()) < 1e-10
    assert abs(sol.p11 - u[0, 0]) < 5e-3 and abs(sol.p22 - u[1, 1]) < 5e-3
    assert abs(sol.success_probability - 0.0882) < 1e-3


def test_completion_examples():
    assert np.allclose(unitary_completion(np.eye(2, 3), 3).entries, np.eye(3))
    with pytest.raises(NoCompletionError):
        unitary_completion(np.array([[1.2, 0], [0, 0.1]]), 3)
    with pytest.raises(NoCompletionError):
        unitary_completion(np.diag([0.5, 0.5]), 3)


def test_completion_of_contraction_block(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a /= 1.1 * np.linalg.norm(a, 2)
    u = unitary_completion(a, 6)
    assert np.allclose(u.entries[:3, :3], a) and unitarity_error(u.entries) < 1e-12


def test_printed_reference_rows_are_orthogonal():
    m = appendix_d_printed_matrix()
    assert abs(np.vdot(m[0], m[2])) < 1e-3 and abs(np.vdot(m[1], m[2])) < 1e-3


def test_cluster_optimum_beats_linear_baseline():
    res = optimize(TargetState.cluster(math.pi), budget=FAST)
    assert res.success_probability >= 0.085 > 2 / 27
    assert res.residual <= 1e-6 and res.fidelity >= 1 - 1e-10
    assert unitarity_error(res.config.unitary.entries) < 1e-12


def test_optimize_is_deterministic():
    a = optimize(TargetState.cluster(2.0), budget=FAST, seed=5)
    b = optimize(TargetState.cluster(2.0), budget=FAST, seed=5)
    assert a.to_json() == b.to_json()


def test_parallel_restarts_match_serial():
    t = TargetState.cluster(math.pi)
    a = optimize(t, budget=Budget(restarts=4, workers=1), seed=3)
    b = optimize(t, budget=Budget(restarts=4, workers=2), seed=3)
    assert a.success_probability == b.success_probability


def test_thread_cap_from_environment(monkeypatch):
    monkeypatch.setenv("HERALDIX_THREADS", "1")
    assert Budget(restarts=64).n_workers() == 1


def test_result_json_round_trip():
    res = optimize(TargetState.cluster(math.pi), budget=FAST)
    back = OptimizationResult.from_json(res.to_json())
    assert back.config == res.config and back.seed == res.seed
    assert back.budget == res.budget and back.success_probability == res.success_probability


def test_separable_vacuum_target_is_certain():
    res = optimize(TargetState(2, {(0, 0): 1.0}), budget=Budget(restarts=4))
    assert res.success_probability > 1 - 1e-6


def test_generic_route_agrees_with_chain():
    t = TargetState.cluster(math.pi)
    chain = optimize(t, budget=FAST)
    generic = optimize(t, method="generic", budget=Budget(restarts=12))
    assert abs(chain.success_probability - generic.success_probability) < 1e-3
    out = ideal_output(generic.config)
    assert fidelity(t.state_vector(), out) > 1 - 1e-8


def test_rectangular_scheme_with_ancilla():
    res = optimize(TargetState.cluster(math.pi), shape=(2, 1, 3, 4), budget=Budget(restarts=6))
    assert res.residual <= 1e-6 and res.success_probability > 0.05


def test_chain_rejects_other_targets():
    with pytest.raises(ConfigurationError):
        optimize(TargetState.ghz(0.0), method="chain")


def test_infeasible_budget_reports_best_residual():
    with pytest.raises(InfeasibleError) as info:
        optimize(TargetState.ghz(0.0), budget=Budget(restarts=1, max_evals=50))
    assert info.value.best_residual > 1e-6


def test_phi_sweep_is_positive_and_anchored():
    rows = phi_sweep([math.pi / 2, math.pi], budget=FAST)
    assert all(p is not None and p > 0 for _, p in rows)
    assert abs(rows[-1][1] - 0.0883) < 1e-3
    with pytest.raises(ValueError):
        phi_sweep([4.0], budget=FAST)
