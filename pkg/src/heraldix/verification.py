"""Named numerical checks shared by the command line and the test suite.

Each check returns :class:`Check` records instead of raising, so callers
can report every outcome and decide on an exit status themselves.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .fock import StateVector, fidelity, qubit_basis
from .heralding import (MeasurementEvent, SchemeConfig, coherent_detector_scale, event_output,
                        event_probability, event_space, feed_forward_correct, ideal_output,
                        joint_state, projector_coefficients)
from .network import random_unitary
from .oracle import OracleReport, brute_force_projector, compare


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    expected: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {float(self.value)!r} (expected {self.expected})"


def all_passed(checks: Iterable[Check]) -> bool:
    return all(c.passed for c in checks)


# --- random configurations -------------------------------------------------------

def random_config(shape: Tuple[int, int, int, int], rng: np.random.Generator) -> SchemeConfig:
    """Haar unitary, uniformly drawn splitter and projector angles, random projector phase."""
    n, k, l, m = shape
    u = random_unitary(m, rng)
    tau = rng.uniform(0.05, math.pi / 2 - 0.05, n)
    eta = rng.uniform(0.05, math.pi / 2 - 0.05, l)
    return SchemeConfig(n, k, l, m, u,
                        tuple(zip(np.cos(tau).tolist(), np.sin(tau).tolist())),
                        tuple(zip(np.cos(eta).tolist(), np.sin(eta).tolist())),
                        theta=float(rng.uniform(0, 2 * math.pi)))


def random_qubit_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    amps /= np.linalg.norm(amps)
    return StateVector(n, dict(zip(qubit_basis(n), amps)))


ORACLE_SUITE = (((2, 0, 2, 3), 200), ((3, 0, 3, 6), 50), ((2, 1, 3, 4), 10))


def run_oracle_suite(seed: int = 0, suite: Sequence = ORACLE_SUITE) -> OracleReport:
    """Closed-form projectors versus brute-force simulation on random configs."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    report = OracleReport(0.0, {}, 0.0, 0)
    for shape, count in suite:
        tag = "".join(map(str, shape)) + ":"
        for _ in range(count):
            cfg = random_config(shape, rng)
            part = compare(projector_coefficients(cfg), brute_force_projector(cfg))
            report = report.merge(part, prefix=tag)
    report.elapsed = time.perf_counter() - start
    return report


# --- check groups -----------------------------------------------------------------

def appendix_d_checks() -> List[Check]:
    from .fixtures import appendix_d_pair

    start = time.perf_counter()
    cfg, target = appendix_d_pair()
    out = ideal_output(cfg)
    fid = fidelity(target.state_vector(), out)
    pr = out.norm_squared()
    elapsed = time.perf_counter() - start
    return [
        Check("appendix-d fidelity", fid >= 0.999, fid, ">= 0.999"),
        Check("appendix-d success probability", 0.086 <= pr <= 0.091, pr, "in [0.086, 0.091]"),
        Check("appendix-d runtime", elapsed < 1.0, elapsed, "< 1 s"),
    ]


def measurement_checks(cfg: Optional[SchemeConfig] = None,
                       input_state: Optional[StateVector] = None) -> List[Check]:
    """Adaptive-detector accounting on one config (default: the reference cluster scheme)."""
    if cfg is None:
        from .fixtures import appendix_d_config
        cfg = appendix_d_config()
    if input_state is None:
        input_state = StateVector.basis((1,) * cfg.n_qubits)
    l = cfg.n_measured
    joint = joint_state(cfg, input_state)
    probs = {ev.outcomes: event_probability(cfg, input_state, ev, joint) for ev in event_space(l)}
    pr_ideal = ideal_output(cfg, input_state).norm_squared()
    p_des = probs[(1,) * l]
    p_inv = probs[(2,) * l]
    desired = event_output(cfg, MeasurementEvent.all_desired(l), input_state)
    corrected = feed_forward_correct(event_output(cfg, MeasurementEvent.all_invert(l), input_state),
                                     MeasurementEvent.all_invert(l))
    ff_gap = 1.0 - fidelity(desired, corrected) if desired.norm() > 0 else 0.0
    scale = coherent_detector_scale(1 / math.sqrt(2), 1 / math.sqrt(2), 1.0)
    total = sum(probs.values())
    want = pr_ideal / 2 ** l
    return [
        Check("all-desired equals all-invert", abs(p_des - p_inv) <= 1e-12, abs(p_des - p_inv), "<= 1e-12"),
        Check("all-desired is Pr/2^L", abs(p_des - want) <= 1e-10, abs(p_des - want), "<= 1e-10"),
        Check("desired plus corrected invert is Pr/2^(L-1)", abs(p_des + p_inv - 2 * want) <= 1e-10,
              abs(p_des + p_inv - 2 * want), "<= 1e-10"),
        Check("event probabilities sum to one", abs(total - 1.0) <= 1e-10, abs(total - 1.0), "<= 1e-10"),
        Check("feed-forward fidelity", ff_gap <= 1e-12, ff_gap, "1 - F <= 1e-12"),
        Check("coherent detector scale", abs(scale - math.exp(-1)) <= 1e-12,
              abs(scale - math.exp(-1)), "<= 1e-12"),
    ]


def loss_checks(cfg: Optional[SchemeConfig] = None, target=None, tol: float = 1e-2) -> List[Check]:
    """Closed forms against the ensemble on a mu grid, plus the decay rate."""
    from .fixtures import appendix_d_pair
    from .noise import (ensemble_fidelity_to, ensemble_success_probability, fidelity_decay_rate,
                        lossy_fidelity, lossy_success_probability)

    if cfg is None or target is None:
        cfg, target = appendix_d_pair()
    grid = np.linspace(0.0, 1.0, 11)
    dev_p = max(abs(lossy_success_probability(mu, target, cfg, tol) - ensemble_success_probability(cfg, mu))
                for mu in grid)
    dev_f = max(abs(lossy_fidelity(mu, target, cfg, tol) - ensemble_fidelity_to(cfg, target, mu))
                for mu in grid)
    rate = fidelity_decay_rate(target, cfg, tol)
    h = 1e-6
    slope = (lossy_fidelity(1.0, target, cfg, tol) - lossy_fidelity(1.0 - h, target, cfg, tol)) / h
    quoted = 2.0 / 0.645 ** 2
    return [
        Check("lossy probability matches ensemble", dev_p <= 1e-10, dev_p, "<= 1e-10"),
        Check("lossy fidelity matches ensemble", dev_f <= 1e-10, dev_f, "<= 1e-10"),
        Check("decay rate equals 2/0.645^2", abs(rate - quoted) <= 1e-3, rate, f"{quoted!r} +- 1e-3"),
        Check("decay rate matches finite difference", abs(rate - slope) <= 1e-4, abs(rate - slope), "<= 1e-4"),
    ]


def oracle_checks(seed: int = 0) -> List[Check]:
    report = run_oracle_suite(seed)
    return [
        Check("oracle max deviation", report.max_abs_deviation < 1e-10, report.max_abs_deviation, "< 1e-10"),
        Check("oracle suite runtime", report.elapsed < 120.0, report.elapsed, "< 120 s"),
    ]
